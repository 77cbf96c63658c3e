#include "delaywave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delaywave/quadrature.hpp"

namespace delaywave {

namespace {

void throw_if(const std::vector<std::string>& errs, const char* where) {
  if (errs.empty()) return;
  std::string msg = where;
  msg += ":";
  for (const auto& e : errs) {
    msg += ' ';
    msg += e;
    msg += ';';
  }
  throw std::invalid_argument(msg);
}

StepStatus scan_field(std::span<const double> f) {
  for (double x : f) {
    if (std::isnan(x)) return StepStatus::nan_detected;
    if (!std::isfinite(x) || std::abs(x) > kBlowUpThreshold)
      return StepStatus::blow_up;
  }
  return StepStatus::ok;
}

void check_dirichlet_zero(std::span<const double> f,
                          std::span<const std::size_t> nodes,
                          const char* name) {
  for (auto i : nodes)
    if (f[i] != 0.0)
      throw std::invalid_argument(std::string(name) +
                                  " must vanish on the Dirichlet boundary");
}

std::vector<std::size_t> dirichlet_nodes(const Grid1D& g) {
  std::vector<std::size_t> out{0};
  if (g.all_dirichlet) out.push_back(static_cast<std::size_t>(g.nx - 1));
  return out;
}

std::vector<std::size_t> dirichlet_nodes(const Grid2D& g) {
  std::vector<std::size_t> out;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const bool on_l = i == 0, on_r = i == g.nx - 1;
      const bool on_b = j == 0, on_t = j == g.ny - 1;
      if (!(on_l || on_r || on_b || on_t)) continue;
      const bool dir = (on_l && g.left == EdgeKind::dirichlet) ||
                       (on_r && g.right == EdgeKind::dirichlet) ||
                       (on_b && g.bottom == EdgeKind::dirichlet) ||
                       (on_t && g.top == EdgeKind::dirichlet);
      if (dir) out.push_back(g.idx(i, j));
    }
  return out;
}

std::size_t field_size(const Grid1D& g) { return static_cast<std::size_t>(g.nx); }
std::size_t field_size(const Grid2D& g) {
  return static_cast<std::size_t>(g.nx) * g.ny;
}

template <typename Grid>
void fill_history(SimState& s, const InitialData& init, const Grid& g,
                  const StepInfo& si) {
  const auto n = field_size(g);
  s.history = HistoryBuffer(static_cast<int>(si.n_tau), n);
  std::vector<double> tmp(n, 0.0);
  for (long m = -si.n_tau; m <= -1; ++m) {
    if (init.history) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      init.history(static_cast<double>(m) * si.dt, tmp);
    }
    s.history.push(tmp);
  }
  if (init.history && si.n_tau > 0 && !init.allow_incompatible_history) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    init.history(0.0, tmp);
    double scale = 1.0, worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale = std::max(scale, std::abs(init.u1[i]));
      worst = std::max(worst, std::abs(tmp[i] - init.u1[i]));
    }
    if (worst > init.compat_tol * scale)
      throw std::invalid_argument(
          "history incompatible with u1 at s=0 (set allow_incompatible_history "
          "to override)");
  }
  s.history.push(init.u1);  // centered velocity at step 0
}

template <typename Grid>
void validate_init(const InitialData& init, const Grid& g) {
  const auto n = field_size(g);
  if (init.u0.size() != n || init.u1.size() != n)
    throw std::invalid_argument("initial fields do not match the grid size");
  const auto dn = dirichlet_nodes(g);
  check_dirichlet_zero(init.u0, dn, "u0");
  check_dirichlet_zero(init.u1, dn, "u1");
}

}  // namespace

std::function<void(double, std::span<double>)> history_from_samples(
    std::vector<std::vector<double>> fields, double tau) {
  if (fields.empty()) throw std::invalid_argument("history_from_samples: no fields");
  if (!(tau > 0.0)) throw std::invalid_argument("history_from_samples: tau must be positive");
  const double spacing = tau / static_cast<double>(fields.size());
  return [fields = std::move(fields), tau, spacing](double s,
                                                    std::span<double> out) {
    const long n = static_cast<long>(fields.size());
    long idx = std::lround((s + tau) / spacing);
    idx = std::clamp(idx, 0L, n - 1);
    const auto& f = fields[static_cast<std::size_t>(idx)];
    if (f.size() != out.size())
      throw std::invalid_argument("history_from_samples: field size mismatch");
    std::copy(f.begin(), f.end(), out.begin());
  };
}

StepInfo cfl_dt(double dt_bound, double tau, long max_slots) {
  if (!(dt_bound > 0.0)) throw std::invalid_argument("cfl_dt: dt bound must be positive");
  if (tau < 0.0) throw std::invalid_argument("cfl_dt: tau must be nonnegative");
  StepInfo si;
  if (tau == 0.0) {
    si.dt = dt_bound;
    si.n_tau = 0;
    return si;
  }
  const double q = tau / dt_bound;
  const long n = static_cast<long>(std::ceil(q - std::max(1e-9 * q, 1e-12)));
  if (n > max_slots) throw std::runtime_error("delay buffer too large");
  si.n_tau = std::max<long>(n, 1);
  si.dt = tau / static_cast<double>(si.n_tau);
  return si;
}

StepInfo cfl_dt(const Grid1D& g, double cfl, double tau, long max_slots) {
  if (!(cfl > 0.0 && cfl < 1.0))
    throw std::invalid_argument("cfl must lie in (0, 1)");
  return cfl_dt(cfl * g.dx, tau, max_slots);
}

StepInfo cfl_dt(const Grid2D& g, double cfl, double tau, long max_slots) {
  if (!(cfl > 0.0 && cfl < 1.0))
    throw std::invalid_argument("cfl must lie in (0, 1)");
  const double bound =
      cfl / std::sqrt(1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy));
  return cfl_dt(bound, tau, max_slots);
}

SimState init_state(const InitialData& init, const PhysicalParams& p,
                    const Grid1D& g, const StepInfo& si) {
  validate_init(init, g);
  if (p.a != 0.0 && si.n_tau < 1)
    throw std::invalid_argument("delayed damping requires n_tau >= 1");

  SimState s;
  s.u_prev = init.u0;
  s.u_curr.assign(g.nx, 0.0);
  s.u_next.assign(g.nx, 0.0);
  fill_history(s, init, g, si);

  const double dt = si.dt;
  const int J = g.nx - 1;
  auto delayed = p.a != 0.0 ? s.history.read_lag(static_cast<int>(si.n_tau))
                            : std::span<const double>{};
  const auto& u0 = init.u0;
  const auto& u1 = init.u1;
  const double idx2 = 1.0 / (g.dx * g.dx);
  for (int j = 1; j < J; ++j) {
    const double lap = (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]) * idx2;
    const double del = p.a != 0.0 ? p.a * delayed[j] : 0.0;
    s.u_curr[j] = u0[j] + dt * u1[j] + 0.5 * dt * dt * (lap - del);
  }
  s.u_curr[0] = 0.0;
  if (g.all_dirichlet) {
    s.u_curr[J] = 0.0;
  } else {
    // ghost from du/dnu = -k u_t at t = 0
    const double ghost = u0[J - 1] - 2.0 * g.dx * p.k * u1[J];
    const double lap = (ghost - 2.0 * u0[J] + u0[J - 1]) * idx2;
    const double del = p.a != 0.0 ? p.a * delayed[J] : 0.0;
    s.u_curr[J] = u0[J] + dt * u1[J] + 0.5 * dt * dt * (lap - del);
  }
  s.step = 1;
  s.t = dt;
  return s;
}

StepStatus step_1d(SimState& s, const PhysicalParams& p, const Grid1D& g,
                   double dt) {
  const int J = g.nx - 1;
  const double idx2 = 1.0 / (g.dx * g.dx);
  const double dt2 = dt * dt;
  const bool has_delay = p.a != 0.0;
  const double* vd =
      has_delay ? s.history.read_lag(s.history.n_tau() - 1).data() : nullptr;
  const auto& uc = s.u_curr;
  const auto& up = s.u_prev;
  auto& un = s.u_next;

  un[0] = 0.0;
  for (int j = 1; j < J; ++j) {
    const double lap = (uc[j + 1] - 2.0 * uc[j] + uc[j - 1]) * idx2;
    const double del = vd ? p.a * vd[j] : 0.0;
    un[j] = 2.0 * uc[j] - up[j] + dt2 * (lap - del);
  }
  if (g.all_dirichlet) {
    un[J] = 0.0;
  } else {
    const double c = p.k * dt / g.dx;
    const double lam2 = dt2 * idx2;
    const double del = vd ? p.a * vd[J] : 0.0;
    un[J] = (2.0 * uc[J] + (c - 1.0) * up[J] +
             2.0 * lam2 * (uc[J - 1] - uc[J]) - dt2 * del) /
            (1.0 + c);
  }

  if (auto st = scan_field(un); st != StepStatus::ok) return st;

  auto slot = s.history.push_slot();
  const double inv2dt = 1.0 / (2.0 * dt);
  for (int j = 0; j <= J; ++j) slot[j] = (un[j] - up[j]) * inv2dt;

  s.u_prev.swap(s.u_curr);
  s.u_curr.swap(s.u_next);
  ++s.step;
  s.t = dt * static_cast<double>(s.step);
  return StepStatus::ok;
}

SimState init_state(const InitialData& init, const PhysicalParams& p,
                    const Grid2D& g, const StepInfo& si) {
  validate_init(init, g);
  if (p.a != 0.0 && si.n_tau < 1)
    throw std::invalid_argument("delayed damping requires n_tau >= 1");

  SimState s;
  const auto n = field_size(g);
  s.u_prev = init.u0;
  s.u_curr.assign(n, 0.0);
  s.u_next.assign(n, 0.0);
  fill_history(s, init, g, si);

  const double dt = si.dt;
  auto delayed = p.a != 0.0 ? s.history.read_lag(static_cast<int>(si.n_tau))
                            : std::span<const double>{};
  const auto& u0 = init.u0;
  const auto& u1 = init.u1;
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const auto q = g.idx(i, j);
      const bool on_l = i == 0, on_r = i == g.nx - 1;
      const bool on_b = j == 0, on_t = j == g.ny - 1;
      const bool dir = (on_l && g.left == EdgeKind::dirichlet) ||
                       (on_r && g.right == EdgeKind::dirichlet) ||
                       (on_b && g.bottom == EdgeKind::dirichlet) ||
                       (on_t && g.top == EdgeKind::dirichlet);
      if (dir) {
        s.u_curr[q] = 0.0;
        continue;
      }
      double lap = 0.0, ghost_gain = 0.0;
      if (on_l)
        lap += (2.0 * u0[g.idx(1, j)] - 2.0 * u0[q]) * ix2;
      else if (on_r)
        lap += (2.0 * u0[g.idx(g.nx - 2, j)] - 2.0 * u0[q]) * ix2;
      else
        lap += (u0[g.idx(i + 1, j)] - 2.0 * u0[q] + u0[g.idx(i - 1, j)]) * ix2;
      if (on_b)
        lap += (2.0 * u0[g.idx(i, 1)] - 2.0 * u0[q]) * iy2;
      else if (on_t)
        lap += (2.0 * u0[g.idx(i, g.ny - 2)] - 2.0 * u0[q]) * iy2;
      else
        lap += (u0[g.idx(i, j + 1)] - 2.0 * u0[q] + u0[g.idx(i, j - 1)]) * iy2;
      if (on_l || on_r) ghost_gain += 2.0 / g.dx;
      if (on_b || on_t) ghost_gain += 2.0 / g.dy;
      lap -= p.k * ghost_gain * u1[q];
      const double del = p.a != 0.0 ? p.a * delayed[q] : 0.0;
      s.u_curr[q] = u0[q] + dt * u1[q] + 0.5 * dt * dt * (lap - del);
    }
  }
  s.step = 1;
  s.t = dt;
  return s;
}

StepStatus step_2d(SimState& s, const PhysicalParams& p, const Grid2D& g,
                   double dt) {
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
  const double dt2 = dt * dt;
  const bool has_delay = p.a != 0.0;
  const double* vd =
      has_delay ? s.history.read_lag(s.history.n_tau() - 1).data() : nullptr;
  const auto& uc = s.u_curr;
  const auto& up = s.u_prev;
  auto& un = s.u_next;

  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const auto q = g.idx(i, j);
      const double lap =
          (uc[q + 1] - 2.0 * uc[q] + uc[q - 1]) * ix2 +
          (uc[g.idx(i, j + 1)] - 2.0 * uc[q] + uc[g.idx(i, j - 1)]) * iy2;
      const double del = vd ? p.a * vd[q] : 0.0;
      un[q] = 2.0 * uc[q] - up[q] + dt2 * (lap - del);
    }
  }

  const auto boundary_node = [&](int i, int j) {
    const auto q = g.idx(i, j);
    const bool on_l = i == 0, on_r = i == g.nx - 1;
    const bool on_b = j == 0, on_t = j == g.ny - 1;
    const bool dir = (on_l && g.left == EdgeKind::dirichlet) ||
                     (on_r && g.right == EdgeKind::dirichlet) ||
                     (on_b && g.bottom == EdgeKind::dirichlet) ||
                     (on_t && g.top == EdgeKind::dirichlet);
    if (dir) {
      un[q] = 0.0;
      return;
    }
    double lap = 0.0, ghost_gain = 0.0;
    if (on_l)
      lap += (2.0 * uc[g.idx(1, j)] - 2.0 * uc[q]) * ix2;
    else if (on_r)
      lap += (2.0 * uc[g.idx(g.nx - 2, j)] - 2.0 * uc[q]) * ix2;
    else
      lap += (uc[q + 1] - 2.0 * uc[q] + uc[q - 1]) * ix2;
    if (on_b)
      lap += (2.0 * uc[g.idx(i, 1)] - 2.0 * uc[q]) * iy2;
    else if (on_t)
      lap += (2.0 * uc[g.idx(i, g.ny - 2)] - 2.0 * uc[q]) * iy2;
    else
      lap += (uc[g.idx(i, j + 1)] - 2.0 * uc[q] + uc[g.idx(i, j - 1)]) * iy2;
    if (on_l || on_r) ghost_gain += 1.0 / g.dx;
    if (on_b || on_t) ghost_gain += 1.0 / g.dy;
    const double c = p.k * dt * ghost_gain;
    const double del = vd ? p.a * vd[q] : 0.0;
    un[q] = (2.0 * uc[q] + (c - 1.0) * up[q] + dt2 * (lap - del)) / (1.0 + c);
  };
  for (int i = 0; i < g.nx; ++i) {
    boundary_node(i, 0);
    boundary_node(i, g.ny - 1);
  }
  for (int j = 1; j < g.ny - 1; ++j) {
    boundary_node(0, j);
    boundary_node(g.nx - 1, j);
  }

  if (auto st = scan_field(un); st != StepStatus::ok) return st;

  auto slot = s.history.push_slot();
  const double inv2dt = 1.0 / (2.0 * dt);
  for (std::size_t q = 0; q < un.size(); ++q)
    slot[q] = (un[q] - up[q]) * inv2dt;

  s.u_prev.swap(s.u_curr);
  s.u_curr.swap(s.u_next);
  ++s.step;
  s.t = dt * static_cast<double>(s.step);
  return StepStatus::ok;
}

FieldView sample_view(const SimState& s, double dt) {
  FieldView f;
  f.t = dt * static_cast<double>(s.step - 1);
  f.u = s.u_prev;
  f.v = s.history.read_lag(0);
  f.history = &s.history;
  f.dt = dt;
  return f;
}

namespace {

template <typename Grid>
EnergySample make_sample(const FieldView& f, const PhysicalParams& p,
                         const Grid& g, const LyapunovWeights& w) {
  EnergySample out;
  out.t = f.t;
  const auto en = energy(f, p, g);
  out.e_standard = en.e_standard;
  out.e_delay = en.e_delay;
  out.e_total = en.e_total;
  out.s_func = s_functional(f, g);
  out.mult_term = multiplier_term(f, g);
  out.lyap = out.e_total + w.gamma1 * out.mult_term + w.gamma2 * out.s_func;
  out.boundary_diss = boundary_dissipation(f, p, g);
  const auto vi = velocity_integrals(f, g);
  out.vsq_now = vi.vsq_now;
  out.vsq_delay = vi.vsq_delay;
  out.cross_delay = vi.cross;
  return out;
}

template <typename Grid>
RunResult run_impl(const RunConfig& cfg, const InitialData& init,
                   const Grid& grid) {
  throw_if(validate_params(cfg.params), "params");
  throw_if(validate_grid(grid), "grid");
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (cfg.sample_every < 1)
    throw std::invalid_argument("sample_every must be >= 1");

  RunResult res;
  res.step_info = cfl_dt(grid, cfg.cfl, cfg.params.tau, cfg.max_history_slots);
  const double dt = res.step_info.dt;
  res.n_steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));

  SimState state = init_state(init, cfg.params, grid, res.step_info);

  const auto emit = [&](const SimState& s) {
    const long n = s.step - 1;
    const bool want_sample =
        n % cfg.sample_every == 0 || n == res.n_steps;
    const bool want_snap =
        cfg.snapshot_every > 0 && (n % cfg.snapshot_every == 0 || n == res.n_steps);
    if (!want_sample && !want_snap) return;
    const auto view = sample_view(s, dt);
    if (want_sample)
      res.samples.push_back(make_sample(view, cfg.params, grid, cfg.weights));
    if (want_snap)
      res.snapshots.push_back(Snapshot{
          view.t, std::vector<double>(view.u.begin(), view.u.end()),
          std::vector<double>(view.v.begin(), view.v.end())});
  };

  emit(state);
  while (state.step <= res.n_steps) {
    StepStatus st;
    if constexpr (std::is_same_v<Grid, Grid1D>)
      st = step_1d(state, cfg.params, grid, dt);
    else
      st = step_2d(state, cfg.params, grid, dt);
    if (st != StepStatus::ok) {
      res.status = st == StepStatus::blow_up ? Termination::blow_up
                                             : Termination::nan_detected;
      res.status_step = state.step;
      break;
    }
    emit(state);
  }
  const auto view = sample_view(state, dt);
  res.final_u.assign(view.u.begin(), view.u.end());
  res.final_v.assign(view.v.begin(), view.v.end());
  res.final_t = view.t;
  return res;
}

}  // namespace

RunResult run(const RunConfig& cfg, const InitialData& init) {
  return std::visit(
      [&](const auto& grid) -> RunResult { return run_impl(cfg, init, grid); },
      cfg.grid);
}

ScalarEnergySeries run_boundary_delay_1d(
    const BoundaryDelayParams& p, const Grid1D& g, std::span<const double> u0,
    std::span<const double> u1,
    const std::function<double(double)>& boundary_history, double t_end,
    double cfl, int sample_every, long max_slots) {
  if (!(p.a > 0.0 && p.k >= 0.0 && p.tau > 0.0))
    throw std::invalid_argument("boundary-delay system requires a > 0, k >= 0, tau > 0");
  if (u0.size() != static_cast<std::size_t>(g.nx) || u1.size() != u0.size())
    throw std::invalid_argument("initial fields do not match the grid size");

  ScalarEnergySeries res;
  res.step_info = cfl_dt(g, cfl, p.tau, max_slots);
  const double dt = res.step_info.dt;
  const long n_tau = res.step_info.n_tau;
  if (n_tau < 2)
    throw std::invalid_argument("boundary delay must span at least 2 steps");
  const long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const int J = g.nx - 1;
  const double idx2 = 1.0 / (g.dx * g.dx);
  const double dt2 = dt * dt;
  const double damp = 1.0 + p.a * dt;

  // scalar ring of the boundary velocity u_t(L, .)
  HistoryBuffer ring(static_cast<int>(n_tau), 1);
  for (long m = -n_tau; m <= -1; ++m) {
    const double v = boundary_history ? boundary_history(m * dt) : 0.0;
    ring.push(std::span<const double>(&v, 1));
  }
  {
    const double v0 = u1[J];
    ring.push(std::span<const double>(&v0, 1));
  }

  std::vector<double> up(u0.begin(), u0.end());
  std::vector<double> uc(g.nx, 0.0), un(g.nx, 0.0), vtmp(g.nx, 0.0), grad;

  // The boundary node is closed with the one-sided second-order form of
  // u_x(L, t) = -k u_t(L, t - tau); the delayed velocity makes the update
  // explicit. A ghost-node closure is unstable here: the delayed forcing
  // amplifies near-Nyquist modes faster than the interior damping decays
  // them.
  const auto close_boundary = [&](std::vector<double>& u, double vb_delayed) {
    u[J] = (4.0 * u[J - 1] - u[J - 2] - 2.0 * g.dx * p.k * vb_delayed) / 3.0;
  };

  // Taylor start for the interior; boundary closed at t = dt with the
  // history value at dt - tau.
  {
    for (int j = 1; j < J; ++j) {
      const double lap = (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]) * idx2;
      uc[j] = u0[j] + dt * u1[j] +
              0.5 * dt2 * (lap - 2.0 * p.a * u1[j] - p.a * p.a * u0[j]);
    }
    uc[0] = 0.0;
    close_boundary(uc, ring.read_lag(static_cast<int>(n_tau) - 1)[0]);
  }

  // E = (1/2) int (u_t^2 + u_x^2 + a^2 u^2); up holds the displacement at
  // the emitted step, vtmp its centered velocity.
  const auto emit = [&](long step) {
    const long n = step - 1;
    if (n % sample_every != 0 && n != n_steps) return;
    detail::gradient_1d(std::span<const double>(up.data(), g.nx), g.dx, grad);
    double e = 0.0;
    for (int j = 0; j < g.nx; ++j) {
      const double w = detail::trapz_w(j, g.nx, g.dx);
      e += w * (vtmp[j] * vtmp[j] + grad[j] * grad[j] +
                p.a * p.a * up[j] * up[j]);
    }
    res.t.push_back(n * dt);
    res.e.push_back(0.5 * e);
  };

  // velocity at step 0 is u1 itself
  std::copy(u1.begin(), u1.end(), vtmp.begin());
  long step = 1;
  emit(step);

  while (step <= n_steps) {
    for (int j = 1; j < J; ++j) {
      const double lap = (uc[j + 1] - 2.0 * uc[j] + uc[j - 1]) * idx2;
      un[j] = (2.0 * uc[j] - up[j] + p.a * dt * up[j] +
               dt2 * (lap - p.a * p.a * uc[j])) /
              damp;
    }
    un[0] = 0.0;
    // u_x(L, t_{n+1}) = -k u_t(L, t_{n+1} - tau): the newest ring slot is
    // the step-(n-1) velocity, so the value at step n+1-n_tau sits at lag
    // n_tau - 2.
    close_boundary(un, ring.read_lag(static_cast<int>(n_tau) - 2)[0]);
    if (auto st = scan_field(un); st != StepStatus::ok) {
      res.status = st == StepStatus::blow_up ? Termination::blow_up
                                             : Termination::nan_detected;
      res.status_step = step;
      return res;
    }
    const double inv2dt = 1.0 / (2.0 * dt);
    for (int j = 0; j < g.nx; ++j) vtmp[j] = (un[j] - up[j]) * inv2dt;
    {
      const double vb = vtmp[J];
      ring.push(std::span<const double>(&vb, 1));
    }
    up.swap(uc);
    uc.swap(un);
    ++step;
    emit(step);
  }
  return res;
}

}  // namespace delaywave

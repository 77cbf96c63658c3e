#include "delaywave/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaywave/acceptance.hpp"
#include "delaywave/diagnostics.hpp"
#include "delaywave/io.hpp"
#include "delaywave/region.hpp"
#include "delaywave/solver.hpp"
#include "delaywave/spectral1d.hpp"

namespace delaywave {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& get_path(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string part =
        path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (cur->is_array() && !part.empty() &&
        part.find_first_not_of("0123456789") == std::string::npos) {
      const std::size_t idx = std::stoul(part);
      if (idx >= cur->size())
        throw ConfigError("missing required field: " + path);
      cur = &(*cur)[idx];
    } else if (cur->is_object() && cur->contains(part)) {
      cur = &(*cur)[part];
    } else {
      throw ConfigError("missing required field: " + path);
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *cur;
}

double num_at(const json& j, const std::string& path) {
  const json& v = get_path(j, path);
  if (!v.is_number()) throw ConfigError("field must be a number: " + path);
  return v.get<double>();
}

long int_at(const json& j, const std::string& path) {
  const json& v = get_path(j, path);
  if (!v.is_number_integer()) throw ConfigError("field must be an integer: " + path);
  return v.get<long>();
}

bool has_path(const json& j, const std::string& path) {
  try {
    get_path(j, path);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

double opt_num(const json& j, const std::string& path, double dflt) {
  return has_path(j, path) ? num_at(j, path) : dflt;
}

long opt_int(const json& j, const std::string& path, long dflt) {
  return has_path(j, path) ? int_at(j, path) : dflt;
}

bool opt_bool(const json& j, const std::string& path, bool dflt) {
  if (!has_path(j, path)) return dflt;
  const json& v = get_path(j, path);
  if (!v.is_boolean()) throw ConfigError("field must be a boolean: " + path);
  return v.get<bool>();
}

std::string opt_str(const json& j, const std::string& path,
                    const std::string& dflt) {
  if (!has_path(j, path)) return dflt;
  const json& v = get_path(j, path);
  if (!v.is_string()) throw ConfigError("field must be a string: " + path);
  return v.get<std::string>();
}

EdgeKind edge_kind(const std::string& s, const std::string& path) {
  if (s == "dirichlet") return EdgeKind::dirichlet;
  if (s == "feedback") return EdgeKind::feedback;
  throw ConfigError("field must be 'dirichlet' or 'feedback': " + path);
}

// -------- initial-data presets --------

// Directional factor vanishing at the Dirichlet end(s); the pure-Neumann
// half-period mode when only one end is Dirichlet.
double mode_factor(double s, double L, bool dir_lo, bool dir_hi) {
  const double pi = std::numbers::pi;
  if (dir_lo && dir_hi) return std::sin(pi * s / L);
  if (dir_lo) return std::sin(0.5 * pi * s / L);
  if (dir_hi) return std::sin(0.5 * pi * (L - s) / L);
  return 1.0;
}

double poly_factor(double s, double L, bool dir_lo, bool dir_hi) {
  if (dir_lo && dir_hi) return 4.0 * s * (L - s) / (L * L);
  if (dir_lo) return s * (2.0 * L - s) / (L * L);
  if (dir_hi) return (L - s) * (L + s) / (L * L);
  return 1.0;
}

InitialData preset_initial(const json& j, const Grid1D& g) {
  InitialData init;
  init.u0.assign(g.nx, 0.0);
  init.u1.assign(g.nx, 0.0);
  if (has_path(j, "init.u0")) {
    const auto u0 = get_path(j, "init.u0").get<std::vector<double>>();
    const auto u1 = get_path(j, "init.u1").get<std::vector<double>>();
    if (u0.size() != static_cast<std::size_t>(g.nx) || u1.size() != u0.size())
      throw ConfigError("init.u0/init.u1 must have grid size");
    init.u0 = u0;
    init.u1 = u1;
    return init;
  }
  const std::string preset = opt_str(j, "init.preset", "eigenmode");
  const bool dir_hi = g.all_dirichlet;
  if (preset == "eigenmode") {
    for (int i = 0; i < g.nx; ++i)
      init.u0[i] = mode_factor(g.x(i), g.length, true, dir_hi);
  } else if (preset == "gaussian") {
    const double c = opt_num(j, "init.center", 0.5 * g.length);
    const double w = opt_num(j, "init.width", 0.1 * g.length);
    if (!(w > 0.0)) throw ConfigError("init.width must be positive");
    for (int i = 0; i < g.nx; ++i) {
      const double d = (g.x(i) - c) / w;
      init.u0[i] = std::exp(-0.5 * d * d);
    }
    init.u0[0] = 0.0;
    if (g.all_dirichlet) init.u0[g.nx - 1] = 0.0;
  } else if (preset == "polynomial") {
    for (int i = 0; i < g.nx; ++i)
      init.u0[i] = poly_factor(g.x(i), g.length, true, dir_hi);
  } else {
    throw ConfigError("unknown init.preset: " + preset);
  }
  return init;
}

InitialData preset_initial(const json& j, const Grid2D& g) {
  InitialData init;
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  init.u0.assign(n, 0.0);
  init.u1.assign(n, 0.0);
  if (has_path(j, "init.u0")) {
    const auto u0 = get_path(j, "init.u0").get<std::vector<double>>();
    const auto u1 = get_path(j, "init.u1").get<std::vector<double>>();
    if (u0.size() != n || u1.size() != n)
      throw ConfigError("init.u0/init.u1 must have grid size");
    init.u0 = u0;
    init.u1 = u1;
    return init;
  }
  const std::string preset = opt_str(j, "init.preset", "eigenmode");
  const bool dlo_x = g.left == EdgeKind::dirichlet;
  const bool dhi_x = g.right == EdgeKind::dirichlet;
  const bool dlo_y = g.bottom == EdgeKind::dirichlet;
  const bool dhi_y = g.top == EdgeKind::dirichlet;
  if (preset == "eigenmode") {
    for (int jy = 0; jy < g.ny; ++jy)
      for (int ix = 0; ix < g.nx; ++ix)
        init.u0[g.idx(ix, jy)] = mode_factor(g.x(ix), g.lx, dlo_x, dhi_x) *
                                 mode_factor(g.y(jy), g.ly, dlo_y, dhi_y);
  } else if (preset == "gaussian") {
    const double cx = opt_num(j, "init.center_x", 0.5 * g.lx);
    const double cy = opt_num(j, "init.center_y", 0.5 * g.ly);
    const double w = opt_num(j, "init.width", 0.1 * std::max(g.lx, g.ly));
    if (!(w > 0.0)) throw ConfigError("init.width must be positive");
    for (int jy = 0; jy < g.ny; ++jy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double dx = (g.x(ix) - cx) / w, dy = (g.y(jy) - cy) / w;
        init.u0[g.idx(ix, jy)] = std::exp(-0.5 * (dx * dx + dy * dy));
      }
    for (int jy = 0; jy < g.ny; ++jy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const bool dir = (ix == 0 && dlo_x) || (ix == g.nx - 1 && dhi_x) ||
                         (jy == 0 && dlo_y) || (jy == g.ny - 1 && dhi_y);
        if (dir) init.u0[g.idx(ix, jy)] = 0.0;
      }
  } else if (preset == "polynomial") {
    for (int jy = 0; jy < g.ny; ++jy)
      for (int ix = 0; ix < g.nx; ++ix)
        init.u0[g.idx(ix, jy)] = poly_factor(g.x(ix), g.lx, dlo_x, dhi_x) *
                                 poly_factor(g.y(jy), g.ly, dlo_y, dhi_y);
  } else {
    throw ConfigError("unknown init.preset: " + preset);
  }
  return init;
}

struct SimulateSetup {
  RunConfig cfg;
  InitialData init;
  json resolved;
};

SimulateSetup parse_simulate_config(const json& j) {
  SimulateSetup s;
  s.cfg.params.a = num_at(j, "params.a");
  s.cfg.params.k = num_at(j, "params.k");
  s.cfg.params.tau = num_at(j, "params.tau");
  s.cfg.params.xi = num_at(j, "params.xi");
  s.cfg.params.conservation_mode = opt_bool(j, "params.conservation_mode", false);
  s.cfg.t_end = num_at(j, "t_end");
  s.cfg.cfl = opt_num(j, "cfl", 0.5);
  s.cfg.sample_every = static_cast<int>(opt_int(j, "sampling.sample_every", 1));
  s.cfg.snapshot_every = static_cast<int>(opt_int(j, "sampling.snapshot_every", 0));

  const std::string kind = opt_str(j, "grid.kind", "interval");
  if (kind == "interval") {
    Grid1D g = Grid1D::uniform(static_cast<int>(int_at(j, "grid.nx")),
                               opt_num(j, "grid.length", 1.0),
                               opt_num(j, "grid.x0", 0.0));
    g.all_dirichlet = opt_bool(j, "grid.all_dirichlet", false);
    s.cfg.grid = g;
    s.init = preset_initial(j, g);
  } else if (kind == "rectangle") {
    Grid2D g = Grid2D::uniform(
        static_cast<int>(int_at(j, "grid.nx")),
        static_cast<int>(int_at(j, "grid.ny")), opt_num(j, "grid.lx", 1.0),
        opt_num(j, "grid.ly", 1.0),
        {opt_num(j, "grid.x0.0", 0.0), opt_num(j, "grid.x0.1", 0.5)});
    if (opt_bool(j, "grid.all_dirichlet", false)) {
      g.left = g.right = g.bottom = g.top = EdgeKind::dirichlet;
    } else {
      g.left = edge_kind(opt_str(j, "grid.edges.left", "dirichlet"), "grid.edges.left");
      g.right = edge_kind(opt_str(j, "grid.edges.right", "feedback"), "grid.edges.right");
      g.bottom = edge_kind(opt_str(j, "grid.edges.bottom", "feedback"), "grid.edges.bottom");
      g.top = edge_kind(opt_str(j, "grid.edges.top", "feedback"), "grid.edges.top");
    }
    s.cfg.grid = g;
    s.init = preset_initial(j, g);
  } else {
    throw ConfigError("grid.kind must be 'interval' or 'rectangle'");
  }

  // history: zero (default) or g(x, s) = u1(x)
  const std::string hist = opt_str(j, "init.history", "zero");
  if (hist == "match_u1") {
    auto u1 = s.init.u1;
    s.init.history = [u1](double, std::span<double> out) {
      std::copy(u1.begin(), u1.end(), out.begin());
    };
  } else if (hist != "zero") {
    throw ConfigError("init.history must be 'zero' or 'match_u1'");
  }

  // Lyapunov weights for the lyap/s columns: explicit, resolved from the
  // geometry ("closed_form"), or zero (lyap = e_total).
  const std::string wmode = opt_str(j, "weights.mode", "default");
  const bool interval = std::holds_alternative<Grid1D>(s.cfg.grid);
  if (has_path(j, "weights.gamma1")) {
    s.cfg.weights.gamma1 = num_at(j, "weights.gamma1");
    s.cfg.weights.gamma2 = num_at(j, "weights.gamma2");
    s.cfg.weights.epsilon = opt_num(j, "weights.epsilon", 0.0);
  } else if (wmode == "closed_form" ||
             (wmode == "default" && interval && s.cfg.params.k > 0.0 &&
              !s.cfg.params.conservation_mode)) {
    GeometryConstants gc;
    if (interval) {
      const auto& g = std::get<Grid1D>(s.cfg.grid);
      gc = geometry_constants(IntervalGeom{g.length, g.x0});
    } else {
      const auto& g = std::get<Grid2D>(s.cfg.grid);
      RectangleGeom r;
      r.lx = g.lx;
      r.ly = g.ly;
      r.x0 = g.x0;
      r.left = g.left;
      r.right = g.right;
      r.bottom = g.bottom;
      r.top = g.top;
      gc = geometry_constants(r);
    }
    const auto rc = closed_form_weights(s.cfg.params.k, gc);
    s.cfg.weights = {rc.gamma1, rc.gamma2, rc.epsilon};
  } else if (wmode != "default" && wmode != "none") {
    throw ConfigError("weights.mode must be 'closed_form', 'none' or 'default'");
  }

  s.resolved = j;
  s.resolved["cfl"] = s.cfg.cfl;
  s.resolved["sampling"] = {{"sample_every", s.cfg.sample_every},
                            {"snapshot_every", s.cfg.snapshot_every}};
  s.resolved["weights"] = {{"gamma1", s.cfg.weights.gamma1},
                           {"gamma2", s.cfg.weights.gamma2},
                           {"epsilon", s.cfg.weights.epsilon}};
  return s;
}

const char* status_str(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blow_up: return "blow_up";
    case Termination::nan_detected: return "nan";
  }
  return "unknown";
}

// Decay-fit window: starts after the delay transient and stops when the
// energy reaches 1e-8 of its initial value, above the O(h^4) floor left
// by spurious grid-frequency reflections.
struct TailWindow {
  double t1 = 0.0, t2 = 0.0;
  bool usable = false;
};

TailWindow tail_window(std::span<const EnergySample> samples, double tau) {
  TailWindow w;
  if (samples.size() < 8) return w;
  const double e0 = samples.front().e_total;
  if (!(e0 > 0.0)) return w;
  w.t2 = samples.back().t;
  for (const auto& s : samples) {
    if (!(s.e_total > 1e-8 * e0)) {
      w.t2 = s.t;
      break;
    }
  }
  w.t1 = std::max(2.0 * tau, 0.25 * w.t2);
  w.usable = w.t2 > w.t1;
  return w;
}

json summary_json(const SimulateSetup& setup, const RunResult& res) {
  json j;
  j["status"] = status_str(res.status);
  if (res.status != Termination::completed) j["status_step"] = res.status_step;
  j["resolved"] = setup.resolved;
  j["resolved"]["dt"] = res.step_info.dt;
  j["resolved"]["n_tau"] = res.step_info.n_tau;
  j["resolved"]["n_steps"] = res.n_steps;

  if (!res.samples.empty()) {
    j["energy"] = {{"initial", res.samples.front().e_total},
                   {"final", res.samples.back().e_total}};
  }

  const auto w = tail_window(res.samples, setup.cfg.params.tau);
  if (w.usable && res.status == Termination::completed) {
    try {
      const auto fit = fit_decay_window(res.samples, w.t1, w.t2);
      j["fit"] = {{"c1", fit.c1},   {"c2", fit.c2},   {"r2", fit.r2},
                  {"t_start", w.t1}, {"t_stop", w.t2}};
      // slack-inflated self-consistency check of the fitted envelope
      std::vector<EnergySample> sub;
      const double e0 = res.samples.front().e_total;
      for (const auto& s : res.samples)
        if (s.t >= w.t1 && s.t <= w.t2) sub.push_back(s);
      if (!sub.empty() && sub.front().e_total > 0.0) {
        const double c1_adj = 1.1 * fit.c1 * e0 / sub.front().e_total;
        const auto bc = check_decay_bound(sub, c1_adj, 0.9 * fit.c2);
        j["bound_check"] = {{"ok", bc.ok}, {"max_violation", bc.max_violation}};
      }
    } catch (const std::exception& e) {
      j["fit"] = nullptr;
      j["fit_error"] = e.what();
    }
  } else {
    j["fit"] = nullptr;
  }

  if (!res.samples.empty() && res.samples.front().e_total > 0.0) {
    const double e0 = res.samples.front().e_total;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& s : res.samples) {
      if (!(s.e_total >= 1e-8 * e0)) continue;
      const double r = s.lyap / s.e_total;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    if (std::isfinite(rmin))
      j["equivalence"] = {{"min_ratio", rmin}, {"max_ratio", rmax}};
  }

  if (const auto* g2 = std::get_if<Grid2D>(&setup.cfg.grid)) {
    json corners = json::array();
    for (const auto& c : mixed_corners(*g2)) corners.push_back({c[0], c[1]});
    j["mixed_corner_nodes"] = corners;
  }
  return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
  json j;
  try {
    j = json::parse(read_text(config_path));
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  SimulateSetup setup;
  RunResult res;
  try {
    setup = parse_simulate_config(j);
    res = run(setup.cfg, setup.init);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const fs::path dir(out_dir);
  write_energy_csv(dir / "energy.csv", res.samples);
  write_text(dir / "summary.json", summary_json(setup, res).dump(2) + "\n");
  if (!res.snapshots.empty()) {
    std::visit(
        [&](const auto& grid) {
          long i = 0;
          for (const auto& snap : res.snapshots) {
            char name[32];
            std::snprintf(name, sizeof(name), "snap_%06ld.csv", i++);
            write_text(dir / "snapshots" / name,
                       snapshot_csv(snap.t, grid, snap.u, snap.v));
          }
        },
        setup.cfg.grid);
  }
  out << "simulate: " << status_str(res.status) << ", "
      << res.samples.size() << " samples -> " << (dir / "energy.csv").string()
      << "\n";
  return 0;
}

int cmd_region(double k, double tau, const std::string& preset, double length,
               const json& overrides, std::optional<std::array<double, 2>> eval,
               const std::string& out_dir, std::ostream& out, std::ostream& err) {
  GeometryConstants gc;
  try {
    if (!overrides.empty()) {
      gc.n = static_cast<int>(overrides.value("n", 1));
      gc.m_inf = overrides.value("m_inf", 1.0);
      gc.delta = overrides.value("delta", 1.0);
      gc.cp = overrides.value("cp", 1.0);
      gc.c0p = overrides.value("c0p", 4.0 / (std::numbers::pi * std::numbers::pi));
      PhysicalParams probe{0.0, k, tau, 1.0, false};
      const auto errs = validate_params(probe, gc);
      if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs) msg += e + "; ";
        throw ConfigError("invalid constants: " + msg);
      }
    } else if (preset == "interval-unit") {
      gc = geometry_constants(IntervalGeom{1.0, 0.0});
    } else if (preset == "interval") {
      gc = geometry_constants(IntervalGeom{length, 0.0});
    } else if (preset == "square-left") {
      gc = geometry_constants(RectangleGeom{});
    } else {
      throw ConfigError("unknown geometry preset: " + preset);
    }
    const auto report = region_report(k, tau, gc, eval);
    const fs::path dir(out_dir);
    write_text(dir / "region.json", region_report_json(report));
    write_text(dir / "polygon.csv", polygon_csv(report.polygon));
    out << "region: a0=" << format_double(report.a0) << " -> "
        << (dir / "region.json").string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "region error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_spectrum(double a, double k, double tau, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
  try {
    const BoundaryDelayParams p{a, k, tau};
    const double threshold = gain_threshold(a);
    const auto res = rightmost_roots(p, default_search_box(p));
    json j;
    j["a"] = a;
    j["k"] = k;
    j["tau"] = tau;
    j["threshold"] = threshold;
    const bool below = k > 0.0 && k < threshold;
    j["condition_satisfied"] = below;
    j["note"] = below ? "gain below threshold: spectrum guaranteed in a left half-plane"
                      : "condition not satisfied; no claim";
    j["abscissa"] = res.abscissa;
    j["beta"] = res.beta;
    j["winding"] = {{"count", res.winding_count},
                    {"found", res.found_count},
                    {"ok", res.winding_ok}};
    j["roots_found"] = res.roots.size();
    const fs::path dir(out_dir);
    write_text(dir / "roots.csv", roots_csv(res));
    write_text(dir / "spectrum.json", j.dump(2) + "\n");
    out << "spectrum: abscissa=" << format_double(res.abscissa) << " -> "
        << (dir / "spectrum.json").string() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "spectrum error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    err << "spectrum error: " << e.what() << "\n";
    return std::string(e.what()).find("incomplete root capture") !=
                   std::string::npos
               ? 3
               : 1;
  }
}

struct SweepRow {
  double a = 0, k = 0, tau = 0, xi = 0;
  std::string status = "error";
  std::string c2;        // empty when unavailable
  std::string abscissa;  // empty unless requested and computed
};

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              int parallelism, std::ostream& out, std::ostream& err) {
  json j;
  std::vector<double> as, ks, taus, xis;
  bool want_spectrum = false;
  json base;
  try {
    j = json::parse(read_text(config_path));
    base = get_path(j, "base");
    const auto axis = [&](const char* name, std::vector<double>& v,
                          const std::string& fallback_path) {
      if (has_path(j, std::string("sweep.") + name))
        v = get_path(j, std::string("sweep.") + name).get<std::vector<double>>();
      else
        v = {num_at(base, fallback_path)};
      if (v.empty()) throw ConfigError(std::string("sweep.") + name + " must be nonempty");
    };
    axis("a", as, "params.a");
    axis("k", ks, "params.k");
    axis("tau", taus, "params.tau");
    axis("xi", xis, "params.xi");
    want_spectrum = opt_bool(j, "spectrum", false);
    // validate the base config once
    (void)parse_simulate_config(base);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  const std::size_t npts = as.size() * ks.size() * taus.size() * xis.size();
  std::vector<SweepRow> rows(npts);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= npts) return;
      std::size_t r = i;
      const double xi = xis[r % xis.size()];
      r /= xis.size();
      const double tau = taus[r % taus.size()];
      r /= taus.size();
      const double k = ks[r % ks.size()];
      r /= ks.size();
      const double a = as[r];
      SweepRow& row = rows[i];
      row.a = a;
      row.k = k;
      row.tau = tau;
      row.xi = xi;
      try {
        json cfg = base;
        cfg["params"]["a"] = a;
        cfg["params"]["k"] = k;
        cfg["params"]["tau"] = tau;
        cfg["params"]["xi"] = xi;
        auto setup = parse_simulate_config(cfg);
        const auto res = run(setup.cfg, setup.init);
        row.status = status_str(res.status);
        const auto w = tail_window(res.samples, tau);
        if (res.status == Termination::completed && w.usable) {
          try {
            row.c2 = format_double(fit_decay_window(res.samples, w.t1, w.t2).c2);
          } catch (const std::exception&) {
          }
        }
      } catch (const std::exception&) {
        row.status = "error";
      }
      if (want_spectrum) {
        try {
          const BoundaryDelayParams p{a, k, tau};
          row.abscissa = format_double(
              rightmost_roots(p, default_search_box(p)).abscissa);
        } catch (const std::exception&) {
        }
      }
    }
  };
  const int nthreads = std::max(
      1, std::min<int>(parallelism > 0
                           ? parallelism
                           : static_cast<int>(std::thread::hardware_concurrency()),
                       static_cast<int>(npts)));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::string csv = want_spectrum ? "a,k,tau,xi,status,C2_fit,abscissa\n"
                                  : "a,k,tau,xi,status,C2_fit\n";
  for (const auto& r : rows) {
    csv += format_double(r.a) + "," + format_double(r.k) + "," +
           format_double(r.tau) + "," + format_double(r.xi) + "," + r.status +
           "," + r.c2;
    if (want_spectrum) csv += "," + r.abscissa;
    csv += "\n";
  }
  write_text(fs::path(out_dir) / "sweep.csv", csv);
  out << "sweep: " << npts << " points -> "
      << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_verify(const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto results = run_acceptance(&err);
  const std::string report = render_report(results);
  write_text(fs::path(out_dir) / "verify_report.txt", report);
  out << report;
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.pass;
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      err << "criterion " << r.id << " exceeded its runtime budget ("
          << r.seconds << "s > " << r.budget_seconds << "s)\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"delayed wave equation toolkit"};
  app.require_subcommand(1);

  const char* env_out = std::getenv("DELAYWAVE_OUT");
  const std::string default_out = env_out ? env_out : "out";

  int rc = 0;

  auto* sim = app.add_subcommand("simulate", "run one simulation from a JSON config");
  std::string sim_config, sim_out = default_out;
  sim->add_option("--config", sim_config, "JSON configuration")->required();
  sim->add_option("--out", sim_out, "output directory");
  sim->callback([&]() { rc = cmd_simulate(sim_config, sim_out, out, err); });

  auto* reg = app.add_subcommand("region", "feasible (a, xi) region and threshold");
  double reg_k = 1.0, reg_tau = 1.0, reg_length = 1.0;
  std::string reg_preset = "interval-unit", reg_out = default_out;
  double reg_minf = -1, reg_delta = -1, reg_cp = -1, reg_c0p = -1;
  long reg_n = -1;
  double reg_a = -1, reg_xi = -1;
  reg->add_option("--k", reg_k, "boundary feedback gain")->required();
  reg->add_option("--tau", reg_tau, "time delay");
  reg->add_option("--preset", reg_preset,
                  "geometry preset: interval-unit, interval, square-left");
  reg->add_option("--length", reg_length, "interval length for --preset interval");
  reg->add_option("--m-inf", reg_minf, "override m_inf");
  reg->add_option("--delta", reg_delta, "override delta");
  reg->add_option("--cp", reg_cp, "override trace constant");
  reg->add_option("--c0p", reg_c0p, "override Poincare constant");
  reg->add_option("--n", reg_n, "override dimension");
  reg->add_option("--a", reg_a, "evaluate constraint margins at this a");
  reg->add_option("--xi", reg_xi, "evaluate constraint margins at this xi");
  reg->add_option("--out", reg_out, "output directory");
  reg->callback([&]() {
    json overrides;
    if (reg_minf >= 0) overrides["m_inf"] = reg_minf;
    if (reg_delta >= 0) overrides["delta"] = reg_delta;
    if (reg_cp >= 0) overrides["cp"] = reg_cp;
    if (reg_c0p >= 0) overrides["c0p"] = reg_c0p;
    if (reg_n >= 0) overrides["n"] = reg_n;
    std::optional<std::array<double, 2>> eval;
    if (reg_a >= 0 && reg_xi >= 0) eval = std::array<double, 2>{reg_a, reg_xi};
    rc = cmd_region(reg_k, reg_tau, reg_preset, reg_length, overrides, eval,
                    reg_out, out, err);
  });

  auto* spec = app.add_subcommand("spectrum", "rightmost roots of the 1D boundary-delay system");
  double sp_a = 1.0, sp_k = 0.5, sp_tau = 1.0;
  std::string sp_out = default_out;
  spec->add_option("--a", sp_a, "interior damping")->required();
  spec->add_option("--k", sp_k, "boundary delayed gain")->required();
  spec->add_option("--tau", sp_tau, "boundary delay")->required();
  spec->add_option("--out", sp_out, "output directory");
  spec->callback([&]() { rc = cmd_spectrum(sp_a, sp_k, sp_tau, sp_out, out, err); });

  auto* sw = app.add_subcommand("sweep", "parameter sweep with deterministic output");
  std::string sw_config, sw_out = default_out;
  int sw_par = 0;
  sw->add_option("--config", sw_config, "JSON sweep configuration")->required();
  sw->add_option("--out", sw_out, "output directory");
  sw->add_option("--parallel", sw_par, "max concurrent simulations");
  sw->callback([&]() { rc = cmd_sweep(sw_config, sw_out, sw_par, out, err); });

  auto* ver = app.add_subcommand("verify", "run the built-in acceptance suite");
  std::string ver_out = default_out;
  ver->add_option("--out", ver_out, "output directory");
  ver->callback([&]() { rc = cmd_verify(ver_out, out, err); });

  std::vector<const char*> argv;
  argv.push_back("delaywave");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace delaywave

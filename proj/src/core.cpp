#include "delaywave/core.hpp"

#include <cmath>
#include <stdexcept>

namespace delaywave {

std::vector<std::string> validate_params(const PhysicalParams& p) {
  std::vector<std::string> errs;
  if (!(p.a >= 0.0)) errs.push_back("a must be nonnegative");
  if (p.conservation_mode) {
    if (!(p.k >= 0.0)) errs.push_back("k must be nonnegative");
    if (!(p.tau >= 0.0)) errs.push_back("tau must be nonnegative");
    if (p.tau == 0.0 && p.a != 0.0)
      errs.push_back("tau = 0 requires a = 0");
  } else {
    if (!(p.k > 0.0)) errs.push_back("k must be positive");
    if (!(p.tau > 0.0)) errs.push_back("tau must be positive");
  }
  if (!(p.xi > 0.0)) errs.push_back("xi must be positive");
  return errs;
}

std::vector<std::string> validate_params(const PhysicalParams& p,
                                         const GeometryConstants& g) {
  auto errs = validate_params(p);
  if (!(g.n >= 1)) errs.push_back("n must be a positive integer");
  if (!(g.delta > 0.0)) errs.push_back("delta must be positive");
  if (!(g.delta <= g.m_inf * (1.0 + 1e-12)))
    errs.push_back("delta must not exceed m_inf");
  if (!(g.cp > 0.0)) errs.push_back("cp must be positive");
  if (!(g.c0p > 0.0)) errs.push_back("c0p must be positive");
  return errs;
}

std::vector<std::string> validate_weights(const LyapunovWeights& w,
                                          const GeometryConstants& g) {
  std::vector<std::string> errs;
  if (!(w.gamma1 > 0.0)) errs.push_back("gamma1 must be positive");
  if (!(w.gamma2 > 0.0)) errs.push_back("gamma2 must be positive");
  if (!(w.gamma1 > w.gamma2))
    errs.push_back("gamma1 must exceed gamma2");
  if (!(w.epsilon > 0.0)) errs.push_back("epsilon must be positive");
  if (!(1.0 - 0.5 * w.epsilon * g.cp > 0.0))
    errs.push_back("epsilon too large: 1 - (epsilon/2)*cp must be positive");
  return errs;
}

Grid1D Grid1D::uniform(int nx, double length, double x0) {
  if (nx < 3) throw std::invalid_argument("Grid1D: nx must be at least 3");
  if (!(length > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
  Grid1D g;
  g.nx = nx;
  g.length = length;
  g.dx = length / static_cast<double>(nx - 1);
  g.x0 = x0;
  return g;
}

std::vector<std::string> validate_grid(const Grid1D& g) {
  std::vector<std::string> errs;
  if (g.nx < 3) errs.push_back("nx must be at least 3");
  if (!(g.dx > 0.0)) errs.push_back("dx must be positive");
  if (std::abs(g.dx * (g.nx - 1) - g.length) > 1e-12 * std::max(1.0, g.length))
    errs.push_back("dx*(nx-1) must equal length");
  if (!g.all_dirichlet) {
    // m.nu = x0 at the Dirichlet end, length - x0 at the feedback end
    if (!(g.x0 <= 0.0)) errs.push_back("x0 must satisfy m.nu <= 0 at x = 0");
    if (!(g.length - g.x0 > 0.0))
      errs.push_back("x0 must satisfy m.nu > 0 at x = length");
  }
  return errs;
}

Grid2D Grid2D::uniform(int nx, int ny, double lx, double ly,
                       std::array<double, 2> x0) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("Grid2D: nx, ny must be at least 3");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("Grid2D: side lengths must be positive");
  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.lx = lx;
  g.ly = ly;
  g.dx = lx / static_cast<double>(nx - 1);
  g.dy = ly / static_cast<double>(ny - 1);
  g.x0 = x0;
  return g;
}

double edge_m_dot_nu_left(const Grid2D& g) { return g.x0[0]; }
double edge_m_dot_nu_right(const Grid2D& g) { return g.lx - g.x0[0]; }
double edge_m_dot_nu_bottom(const Grid2D& g) { return g.x0[1]; }
double edge_m_dot_nu_top(const Grid2D& g) { return g.ly - g.x0[1]; }

std::vector<std::string> validate_grid(const Grid2D& g) {
  std::vector<std::string> errs;
  if (g.nx < 3 || g.ny < 3) errs.push_back("nx and ny must be at least 3");
  if (std::abs(g.dx * (g.nx - 1) - g.lx) > 1e-12 * std::max(1.0, g.lx) ||
      std::abs(g.dy * (g.ny - 1) - g.ly) > 1e-12 * std::max(1.0, g.ly))
    errs.push_back("spacings must match side lengths");
  if (g.all_dirichlet()) return errs;

  const struct {
    const char* name;
    EdgeKind kind;
    double mnu;
  } edges[] = {
      {"left", g.left, edge_m_dot_nu_left(g)},
      {"right", g.right, edge_m_dot_nu_right(g)},
      {"bottom", g.bottom, edge_m_dot_nu_bottom(g)},
      {"top", g.top, edge_m_dot_nu_top(g)},
  };
  bool has_dirichlet = false;
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::dirichlet) {
      has_dirichlet = true;
      if (!(e.mnu <= 0.0))
        errs.push_back(std::string(e.name) + ": m.nu must be <= 0 on a Dirichlet edge");
    } else {
      if (!(e.mnu > 0.0))
        errs.push_back(std::string(e.name) + ": m.nu must be positive on a feedback edge");
    }
  }
  if (!has_dirichlet) errs.push_back("at least one edge must be Dirichlet");
  return errs;
}

std::vector<std::array<int, 2>> mixed_corners(const Grid2D& g) {
  std::vector<std::array<int, 2>> out;
  const auto mixed = [](EdgeKind a, EdgeKind b) { return a != b; };
  if (mixed(g.left, g.bottom)) out.push_back({0, 0});
  if (mixed(g.right, g.bottom)) out.push_back({g.nx - 1, 0});
  if (mixed(g.left, g.top)) out.push_back({0, g.ny - 1});
  if (mixed(g.right, g.top)) out.push_back({g.nx - 1, g.ny - 1});
  return out;
}

HistoryBuffer::HistoryBuffer(int n_tau, std::size_t field_size)
    : n_tau_(n_tau), field_size_(field_size) {
  if (n_tau < 0) throw std::invalid_argument("HistoryBuffer: n_tau must be >= 0");
  storage_.assign(static_cast<std::size_t>(n_tau_ + 1) * field_size_, 0.0);
}

void HistoryBuffer::push(std::span<const double> v) {
  auto slot = push_slot();
  if (v.size() != field_size_)
    throw std::invalid_argument("HistoryBuffer: field size mismatch");
  std::copy(v.begin(), v.end(), slot.begin());
}

std::span<double> HistoryBuffer::push_slot() {
  head_ = (head_ + 1) % (n_tau_ + 1);
  ++pushed_;
  return {storage_.data() + static_cast<std::size_t>(head_) * field_size_,
          field_size_};
}

std::span<const double> HistoryBuffer::read_lag(int lag) const {
  if (lag < 0 || lag > n_tau_ || lag >= pushed_)
    throw std::out_of_range("HistoryBuffer: lag outside stored window");
  const int cap = n_tau_ + 1;
  const int slot = (head_ - lag % cap + cap) % cap;
  return {storage_.data() + static_cast<std::size_t>(slot) * field_size_,
          field_size_};
}

}  // namespace delaywave

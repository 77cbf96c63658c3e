#include "delaywave/region.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "delaywave/eigensolve.hpp"
#include "delaywave/io.hpp"

namespace delaywave {

namespace {

Grid2D make_grid(const RectangleGeom& r, int resolution) {
  // resolution = node count along the longer side; the other side keeps
  // the spacing as close as possible
  const double lmax = std::max(r.lx, r.ly);
  const double h = lmax / static_cast<double>(resolution - 1);
  const int nx = std::max(3, static_cast<int>(std::lround(r.lx / h)) + 1);
  const int ny = std::max(3, static_cast<int>(std::lround(r.ly / h)) + 1);
  Grid2D g = Grid2D::uniform(nx, ny, r.lx, r.ly, r.x0);
  g.left = r.left;
  g.right = r.right;
  g.bottom = r.bottom;
  g.top = r.top;
  return g;
}

double richardson_pair(double coarse, double fine, const char* what) {
  const double extrap = fine + (fine - coarse) / 3.0;
  if (std::abs(fine - coarse) > 0.01 * std::abs(extrap))
    throw std::runtime_error(std::string(what) +
                             ": eigen route not grid-converged (>1% between "
                             "resolutions)");
  return extrap;
}

constexpr int kBaseResolution = 33;

}  // namespace

double trace_constant_fe(const GeometryDesc& geom, int resolution) {
  return std::visit(
      [&](const auto& g) -> double {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, IntervalGeom>) {
          auto m = assemble_interval(resolution, g.length);
          return top_generalized_eigenvalue(m.K, m.B);
        } else {
          auto m = assemble_rectangle(make_grid(g, resolution));
          return top_generalized_eigenvalue(m.K, m.B);
        }
      },
      geom);
}

double poincare_constant_fe(const GeometryDesc& geom, int resolution) {
  return std::visit(
      [&](const auto& g) -> double {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, IntervalGeom>) {
          auto m = assemble_interval(resolution, g.length);
          return top_generalized_eigenvalue(m.K, m.M);
        } else {
          auto m = assemble_rectangle(make_grid(g, resolution));
          return top_generalized_eigenvalue(m.K, m.M);
        }
      },
      geom);
}

double trace_constant(const GeometryDesc& geom) {
  if (const auto* iv = std::get_if<IntervalGeom>(&geom)) return iv->length;
  const double c = trace_constant_fe(geom, kBaseResolution);
  const double f = trace_constant_fe(geom, 2 * (kBaseResolution - 1) + 1);
  return richardson_pair(c, f, "trace_constant");
}

double poincare_constant(const GeometryDesc& geom) {
  if (const auto* iv = std::get_if<IntervalGeom>(&geom)) {
    const double L = iv->length;
    return 4.0 * L * L / (std::numbers::pi * std::numbers::pi);
  }
  const double c = poincare_constant_fe(geom, kBaseResolution);
  const double f = poincare_constant_fe(geom, 2 * (kBaseResolution - 1) + 1);
  return richardson_pair(c, f, "poincare_constant");
}

GeometryConstants geometry_constants(const GeometryDesc& geom) {
  GeometryConstants out;
  if (const auto* iv = std::get_if<IntervalGeom>(&geom)) {
    if (!(iv->length > 0.0))
      throw std::invalid_argument("interval length must be positive");
    if (!(iv->x0 <= 0.0))
      throw std::invalid_argument("x0 must satisfy m.nu <= 0 at the Dirichlet end");
    out.n = 1;
    out.m_inf = iv->length - iv->x0;
    out.delta = iv->length - iv->x0;
  } else {
    const auto& r = std::get<RectangleGeom>(geom);
    Grid2D g = make_grid(r, 5);
    const auto errs = validate_grid(g);
    if (!errs.empty()) {
      std::string msg = "rectangle geometry invalid:";
      for (const auto& e : errs) msg += " " + e + ";";
      throw std::invalid_argument(msg);
    }
    out.n = 2;
    double m_inf = 0.0;
    for (double cx : {0.0, r.lx})
      for (double cy : {0.0, r.ly})
        m_inf = std::max(m_inf, std::hypot(cx - r.x0[0], cy - r.x0[1]));
    out.m_inf = m_inf;
    double delta = std::numeric_limits<double>::infinity();
    if (r.left == EdgeKind::feedback) delta = std::min(delta, edge_m_dot_nu_left(g));
    if (r.right == EdgeKind::feedback) delta = std::min(delta, edge_m_dot_nu_right(g));
    if (r.bottom == EdgeKind::feedback) delta = std::min(delta, edge_m_dot_nu_bottom(g));
    if (r.top == EdgeKind::feedback) delta = std::min(delta, edge_m_dot_nu_top(g));
    if (!std::isfinite(delta))
      throw std::invalid_argument("rectangle needs at least one feedback edge");
    out.delta = delta;
  }
  out.cp = trace_constant(geom);
  out.c0p = poincare_constant(geom);
  return out;
}

WeightChoices closed_form_weights(double k, const GeometryConstants& g) {
  if (!(k > 0.0)) throw std::invalid_argument("closed_form_weights: k must be positive");
  if (!(g.m_inf > 0.0 && g.delta > 0.0 && g.cp > 0.0 && g.c0p > 0.0))
    throw std::invalid_argument("closed_form_weights: geometry constants must be positive");
  const double nm1 = static_cast<double>(g.n - 1);
  WeightChoices out;
  out.epsilon = 1.0 / g.cp;
  const double b2 = 1.0 / (2.0 * g.m_inf + g.c0p + 1.0);
  const double b3 =
      k / (k * k * (2.0 * g.m_inf * g.m_inf / g.delta + 0.5 * nm1 * nm1 * g.cp) +
           g.m_inf);
  out.gamma1 = std::min({1.0 / 3.0, b2, b3});
  out.gamma2 = 0.5 * out.gamma1;
  return out;
}

double a0_threshold(double k, const GeometryConstants& g) {
  const auto rc = closed_form_weights(k, g);
  const double nm1 = static_cast<double>(g.n - 1);
  const double b4 =
      0.5 / (g.m_inf * g.m_inf + 0.5 * nm1 * nm1 * g.c0p);
  return std::min(rc.gamma1 / 3.0, b4);
}

FeasibilityReport feasible(double a, double xi, double gamma1, double gamma2,
                           double epsilon, double tau, double k,
                           const GeometryConstants& g, double tol) {
  const double nm1 = static_cast<double>(g.n - 1);
  FeasibilityReport r;

  r.velocity.margin = (gamma1 - gamma2) - 0.5 * (a + xi);
  r.velocity.ok = r.velocity.margin > tol;

  r.delayed_velocity.margin =
      gamma2 * std::exp(-tau) - (a * (0.5 + 1.5 * gamma1) - 0.5 * xi);
  r.delayed_velocity.ok = r.delayed_velocity.margin >= -tol;

  r.gradient.margin = (1.0 - 0.5 * epsilon * g.cp) -
                      a * (g.m_inf * g.m_inf + 0.5 * nm1 * nm1 * g.c0p);
  r.gradient.ok = r.gradient.margin > tol;

  r.boundary_gain.margin =
      k - gamma1 * (k * k * (2.0 * g.m_inf * g.m_inf / g.delta +
                             0.5 * nm1 * nm1 / epsilon) +
                    g.m_inf);
  r.boundary_gain.ok = r.boundary_gain.margin >= -tol;

  r.all_ok = r.velocity.ok && r.delayed_velocity.ok && r.gradient.ok &&
             r.boundary_gain.ok;
  return r;
}

namespace {

struct HalfPlane {
  double na, nxi, c;  // na*a + nxi*xi <= c
};

std::vector<std::array<double, 2>> clip(
    const std::vector<std::array<double, 2>>& poly, const HalfPlane& hp) {
  std::vector<std::array<double, 2>> out;
  const auto inside = [&](const std::array<double, 2>& p) {
    return hp.na * p[0] + hp.nxi * p[1] <= hp.c;
  };
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const bool pin = inside(p), qin = inside(q);
    if (pin) out.push_back(p);
    if (pin != qin) {
      const double fp = hp.na * p[0] + hp.nxi * p[1] - hp.c;
      const double fq = hp.na * q[0] + hp.nxi * q[1] - hp.c;
      const double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

double polygon_area(const std::vector<std::array<double, 2>>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

}  // namespace

Polygon feasible_polygon(double gamma1, double gamma2, double epsilon,
                         double tau, double k, const GeometryConstants& g) {
  (void)k;
  Polygon out;
  if (!(gamma1 > gamma2)) {
    throw std::invalid_argument("feasible_polygon: gamma1 must exceed gamma2");
  }
  const double nm1 = static_cast<double>(g.n - 1);
  const double cap = 1.0 - 0.5 * epsilon * g.cp;
  if (!(cap > 0.0)) {
    out.empty_reason = "gradient constraint infeasible: 1 - (epsilon/2) cp <= 0";
    return out;
  }
  const double gap2 = 2.0 * (gamma1 - gamma2);
  const double box = 1.05 * gap2;
  std::vector<std::array<double, 2>> poly = {
      {0.0, 0.0}, {box, 0.0}, {box, box}, {0.0, box}};

  // velocity constraint: a + xi <= 2 (gamma1 - gamma2)
  poly = clip(poly, {1.0, 1.0, gap2});
  // delayed-velocity constraint: a (1 + 3 gamma1) - xi <= 2 gamma2 e^-tau
  poly = clip(poly, {1.0 + 3.0 * gamma1, -1.0, 2.0 * gamma2 * std::exp(-tau)});
  // gradient constraint: a <= cap / (m^2 + (n-1)^2 c0p / 2)
  poly = clip(poly, {1.0, 0.0, cap / (g.m_inf * g.m_inf + 0.5 * nm1 * nm1 * g.c0p)});

  if (poly.size() < 3 || polygon_area(poly) < 1e-30) {
    out.empty_reason = "feasible set is empty or degenerate";
    return out;
  }
  // drop consecutive duplicates introduced by clipping
  std::vector<std::array<double, 2>> dedup;
  for (const auto& p : poly) {
    if (dedup.empty() || std::abs(p[0] - dedup.back()[0]) > 1e-15 ||
        std::abs(p[1] - dedup.back()[1]) > 1e-15)
      dedup.push_back(p);
  }
  if (dedup.size() > 1 && std::abs(dedup.front()[0] - dedup.back()[0]) <= 1e-15 &&
      std::abs(dedup.front()[1] - dedup.back()[1]) <= 1e-15)
    dedup.pop_back();
  out.vertices = std::move(dedup);
  return out;
}

bool point_in_polygon(const Polygon& poly, double a, double xi, double tol) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    const double cross =
        (q[0] - p[0]) * (xi - p[1]) - (q[1] - p[1]) * (a - p[0]);
    if (cross < -tol) return false;
  }
  return true;
}

std::string polygon_csv(const Polygon& poly) {
  std::string out = "a,xi\n";
  for (const auto& p : poly.vertices)
    out += format_double(p[0]) + "," + format_double(p[1]) + "\n";
  return out;
}

RegionReport region_report(double k, double tau, const GeometryConstants& g,
                           std::optional<std::array<double, 2>> eval_point) {
  RegionReport r;
  r.k = k;
  r.tau = tau;
  r.geom = g;
  const auto rc = closed_form_weights(k, g);
  r.epsilon = rc.epsilon;
  r.gamma1 = rc.gamma1;
  r.gamma2 = rc.gamma2;
  r.a0 = a0_threshold(k, g);
  if (eval_point) {
    r.eval_a = (*eval_point)[0];
    r.eval_xi = (*eval_point)[1];
  } else {
    r.eval_a = 0.5 * r.a0;
    r.eval_xi = 2.0 * r.eval_a;
  }
  r.feas = feasible(r.eval_a, r.eval_xi, r.gamma1, r.gamma2, r.epsilon, tau, k, g);
  r.gate_ok = r.feas.boundary_gain.ok;
  r.gate_margin = r.feas.boundary_gain.margin;
  r.polygon = feasible_polygon(r.gamma1, r.gamma2, r.epsilon, tau, k, g);
  return r;
}

std::string region_report_json(const RegionReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["tau"] = r.tau;
  j["geometry"] = {{"n", r.geom.n},
                   {"m_inf", r.geom.m_inf},
                   {"delta", r.geom.delta},
                   {"cp", r.geom.cp},
                   {"c0p", r.geom.c0p}};
  j["epsilon"] = r.epsilon;
  j["gamma1"] = r.gamma1;
  j["gamma2"] = r.gamma2;
  j["a0"] = r.a0;
  j["eval_point"] = {{"a", r.eval_a}, {"xi", r.eval_xi}};
  const auto cc = [](const ConstraintCheck& c) {
    return nlohmann::json{{"ok", c.ok}, {"margin", c.margin}};
  };
  j["constraints"] = {{"velocity", cc(r.feas.velocity)},
                      {"delayed_velocity", cc(r.feas.delayed_velocity)},
                      {"gradient", cc(r.feas.gradient)},
                      {"boundary_gain", cc(r.feas.boundary_gain)}};
  j["feasible"] = r.feas.all_ok;
  j["gamma1_gate"] = {{"ok", r.gate_ok}, {"margin", r.gate_margin}};
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& p : r.polygon.vertices)
    verts.push_back({{"a", p[0]}, {"xi", p[1]}});
  j["polygon"] = verts;
  if (!r.polygon.empty_reason.empty())
    j["polygon_empty_reason"] = r.polygon.empty_reason;
  return j.dump(2) + "\n";
}

}  // namespace delaywave

#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "delaywave/core.hpp"

namespace delaywave {

/// Interval (0, length) with the Dirichlet end at 0 and the feedback end
/// at length; multiplier origin x0 (must satisfy x0 <= 0).
struct IntervalGeom {
  double length = 1.0;
  double x0 = 0.0;
};

/// Rectangle (0,lx) x (0,ly); each edge is Dirichlet or feedback.
struct RectangleGeom {
  double lx = 1.0, ly = 1.0;
  std::array<double, 2> x0 = {0.0, 0.5};
  EdgeKind left = EdgeKind::dirichlet;
  EdgeKind right = EdgeKind::feedback;
  EdgeKind bottom = EdgeKind::feedback;
  EdgeKind top = EdgeKind::feedback;
};

using GeometryDesc = std::variant<IntervalGeom, RectangleGeom>;

/// Smallest C with int_{feedback bdry} phi^2 <= C int |grad phi|^2 over
/// fields vanishing on the Dirichlet part. Closed form (= length) on the
/// interval; on the rectangle the value of the discrete Rayleigh problem,
/// Richardson-extrapolated over two resolutions (throws if the two
/// resolutions disagree by more than 1%).
double trace_constant(const GeometryDesc& geom);

/// Smallest C with int phi^2 <= C int |grad phi|^2; closed form
/// 4 L^2 / pi^2 on the interval, discrete eigen route on the rectangle.
double poincare_constant(const GeometryDesc& geom);

// Single-resolution discrete values (the eigen route used for the
// rectangle; on the interval these converge to the closed forms and are
// compared against them in the tests).
double trace_constant_fe(const GeometryDesc& geom, int resolution);
double poincare_constant_fe(const GeometryDesc& geom, int resolution);

/// n, m_inf, delta from the geometry; cp/c0p via trace_constant and
/// poincare_constant. Throws when the multiplier sign conditions fail.
GeometryConstants geometry_constants(const GeometryDesc& geom);

struct WeightChoices {
  double epsilon = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  // The accompanying rule for the energy weight is xi = 2a.
};

/// Closed-form parameter choices: epsilon = 1/cp, gamma2 = gamma1/2, and
/// gamma1 = min{1/3, (2 m_inf + c0p + 1)^-1,
///              k (k^2 (2 m_inf^2/delta + (n-1)^2 cp / 2) + m_inf)^-1}.
WeightChoices closed_form_weights(double k, const GeometryConstants& g);

/// Stability threshold on the delay-damping coefficient:
/// a0 = min{1/9, (1/3)(2 m_inf + c0p + 1)^-1,
///          (k/3)(k^2(2 m_inf^2/delta + (n-1)^2 cp/2) + m_inf)^-1,
///          (1/2)(m_inf^2 + (n-1)^2 c0p / 2)^-1}.
double a0_threshold(double k, const GeometryConstants& g);

struct ConstraintCheck {
  bool ok = false;
  double margin = 0.0;  // RHS - LHS of the constraint as typeset
};

struct FeasibilityReport {
  ConstraintCheck velocity;          // (a+xi)/2 < gamma1 - gamma2      (strict)
  ConstraintCheck delayed_velocity;  // a(1/2+3g1/2) - xi/2 <= g2 e^-tau
  ConstraintCheck gradient;          // a(m^2+(n-1)^2 c0p/2) < 1 - eps*cp/2 (strict)
  ConstraintCheck boundary_gain;     // g1 [k^2(2m^2/d + (n-1)^2/(2eps)) + m] <= k
  bool all_ok = false;
};

FeasibilityReport feasible(double a, double xi, double gamma1, double gamma2,
                           double epsilon, double tau, double k,
                           const GeometryConstants& g, double tol = 0.0);

struct Polygon {
  std::vector<std::array<double, 2>> vertices;  // counterclockwise
  std::string empty_reason;                     // set when vertices is empty
};

/// Feasible set of (a, xi) at fixed weights: intersection of a >= 0,
/// xi >= 0 and the velocity / delayed-velocity / gradient half-planes.
/// The boundary-gain constraint has no (a, xi) dependence and is exposed
/// as a separate gate in the report.
Polygon feasible_polygon(double gamma1, double gamma2, double epsilon,
                         double tau, double k, const GeometryConstants& g);

bool point_in_polygon(const Polygon& poly, double a, double xi,
                      double tol = 0.0);

std::string polygon_csv(const Polygon& poly);

struct RegionReport {
  double k = 0.0, tau = 0.0;
  GeometryConstants geom;
  double epsilon = 0.0, gamma1 = 0.0, gamma2 = 0.0;
  double a0 = 0.0;
  double eval_a = 0.0, eval_xi = 0.0;
  FeasibilityReport feas;
  bool gate_ok = false;
  double gate_margin = 0.0;
  Polygon polygon;
};

/// Report with the closed-form choices, the threshold, the polygon and
/// the constraint margins at a supplied (a, xi); defaults to the point
/// a = a0/2, xi = 2a.
RegionReport region_report(double k, double tau, const GeometryConstants& g,
                           std::optional<std::array<double, 2>> eval_point = {});

std::string region_report_json(const RegionReport& r);

}  // namespace delaywave

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace delaywave {

/// Coefficients of the delayed wave system: interior delay damping a,
/// boundary feedback gain k, delay tau, and the weight xi of the
/// delay-window contribution to the energy.
struct PhysicalParams {
  double a = 0.0;
  double k = 1.0;
  double tau = 1.0;
  double xi = 0.1;
  // Permits k = 0 (and tau = 0 when a = 0) for conservation/diagnostic runs.
  bool conservation_mode = false;
};

/// Constants describing the domain and the multiplier m(x) = x - x0:
/// dimension n, sup-norm of m, minimal normal component delta on the
/// feedback boundary, trace constant cp and Poincare constant c0p.
struct GeometryConstants {
  int n = 1;
  double m_inf = 1.0;
  double delta = 1.0;
  double cp = 1.0;   // smallest C with  int_{feedback bdry} phi^2 <= C int |grad phi|^2
  double c0p = 0.0;  // smallest C with  int phi^2 <= C int |grad phi|^2
};

/// Weights of the Lyapunov functional and the trace-splitting epsilon.
struct LyapunovWeights {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double epsilon = 0.0;
};

// Returns the list of violated invariants, empty when valid.
std::vector<std::string> validate_params(const PhysicalParams& p);
std::vector<std::string> validate_params(const PhysicalParams& p,
                                         const GeometryConstants& g);
std::vector<std::string> validate_weights(const LyapunovWeights& w,
                                          const GeometryConstants& g);

/// Uniform grid on (0, length) with nodes x_i = i*dx. The homogeneous
/// Dirichlet end is x = 0, the feedback end x = length, unless
/// all_dirichlet is set (conservation benchmarks only).
struct Grid1D {
  int nx = 0;        // node count including both boundary nodes
  double dx = 0.0;
  double length = 0.0;
  double x0 = 0.0;   // multiplier origin, m(x) = x - x0
  bool all_dirichlet = false;

  static Grid1D uniform(int nx, double length, double x0 = 0.0);
  double x(int i) const { return static_cast<double>(i) * dx; }
};

std::vector<std::string> validate_grid(const Grid1D& g);

enum class EdgeKind { dirichlet, feedback };

/// Tensor grid on (0,lx) x (0,ly); nodes (i*dx, j*dy), row-major
/// index j*nx + i. Every boundary edge is either Dirichlet or feedback.
struct Grid2D {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double lx = 0.0, ly = 0.0;
  std::array<double, 2> x0 = {0.0, 0.0};
  EdgeKind left = EdgeKind::dirichlet;
  EdgeKind right = EdgeKind::feedback;
  EdgeKind bottom = EdgeKind::feedback;
  EdgeKind top = EdgeKind::feedback;

  static Grid2D uniform(int nx, int ny, double lx, double ly,
                        std::array<double, 2> x0 = {0.0, 0.0});
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  double x(int i) const { return static_cast<double>(i) * dx; }
  double y(int j) const { return static_cast<double>(j) * dy; }
  bool all_dirichlet() const {
    return left == EdgeKind::dirichlet && right == EdgeKind::dirichlet &&
           bottom == EdgeKind::dirichlet && top == EdgeKind::dirichlet;
  }
};

// m.nu per edge (constant along each edge of a rectangle).
double edge_m_dot_nu_left(const Grid2D& g);
double edge_m_dot_nu_right(const Grid2D& g);
double edge_m_dot_nu_bottom(const Grid2D& g);
double edge_m_dot_nu_top(const Grid2D& g);

std::vector<std::string> validate_grid(const Grid2D& g);

// Corner nodes shared by a Dirichlet and a feedback edge (the continuous
// theory assumes the two boundary parts do not touch; on a rectangle they
// must, so these nodes are flagged in run summaries).
std::vector<std::array<int, 2>> mixed_corners(const Grid2D& g);

/// Ring buffer of velocity fields covering the delay window. Holds
/// n_tau + 1 fields; push() overwrites the oldest slot, read_lag(j)
/// returns the field pushed j pushes ago (0 = newest, n_tau = oldest).
class HistoryBuffer {
 public:
  HistoryBuffer() = default;
  HistoryBuffer(int n_tau, std::size_t field_size);

  void push(std::span<const double> v);
  std::span<const double> read_lag(int lag) const;
  // In-place variant used by the stepper to avoid a temporary.
  std::span<double> push_slot();

  int n_tau() const { return n_tau_; }
  std::size_t field_size() const { return field_size_; }
  long pushed() const { return pushed_; }
  bool full() const { return pushed_ >= n_tau_ + 1; }

 private:
  int n_tau_ = 0;
  std::size_t field_size_ = 0;
  int head_ = -1;
  long pushed_ = 0;
  std::vector<double> storage_;
};

/// Time-stepping state. u_prev/u_curr are the displacement fields at the
/// two most recent computed steps; history holds centered velocities.
/// Dirichlet nodes of both fields are exactly zero at all times.
struct SimState {
  double t = 0.0;
  long step = 0;  // u_curr is the field at this step index
  std::vector<double> u_prev, u_curr;
  HistoryBuffer history;
  std::vector<double> u_next;  // stepper scratch
};

/// One row of the diagnostic series. e_total == e_standard + e_delay by
/// construction. vsq_now/vsq_delay/cross_delay are the velocity integrals
/// needed by the energy-rate identity check; they are not part of the
/// CSV schema.
struct EnergySample {
  double t = 0.0;
  double e_standard = 0.0;
  double e_delay = 0.0;
  double e_total = 0.0;
  double s_func = 0.0;
  double mult_term = 0.0;
  double lyap = 0.0;
  double boundary_diss = 0.0;
  double vsq_now = 0.0;
  double vsq_delay = 0.0;
  double cross_delay = 0.0;
};

/// Rightmost characteristic roots of the 1D boundary-delay system.
struct SpectralResult {
  struct Root {
    std::complex<double> omega;
    double residual = 0.0;  // |F(omega)| in scaled form
  };
  std::vector<Root> roots;  // sorted by descending real part
  double abscissa = 0.0;    // max Re over roots
  double beta = 0.0;        // -abscissa when abscissa < 0, else 0
  double box_re_lo = 0.0, box_re_hi = 0.0, box_im_hi = 0.0;
  bool winding_ok = false;
  long winding_count = 0;  // zeros predicted by the argument principle
  long found_count = 0;    // zeros located (conjugates included)
};

}  // namespace delaywave

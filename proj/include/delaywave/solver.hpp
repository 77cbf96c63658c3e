#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "delaywave/core.hpp"
#include "delaywave/diagnostics.hpp"

namespace delaywave {

/// Initial displacement/velocity and the velocity history on (-tau, 0).
/// history fills a field with g(., s); a null history means g = 0.
struct InitialData {
  std::vector<double> u0, u1;
  std::function<void(double s, std::span<double> out)> history;
  double compat_tol = 1e-8;
  bool allow_incompatible_history = false;
};

// Wraps sampled history fields (oldest first, uniformly covering
// s = -tau .. just below 0) as a closed-form evaluator; s is snapped to
// the nearest sample.
std::function<void(double, std::span<double>)> history_from_samples(
    std::vector<std::vector<double>> fields, double tau);

struct StepInfo {
  double dt = 0.0;
  long n_tau = 0;
};

inline constexpr long kDefaultMaxHistorySlots = 5'000'000;

// Largest dt not exceeding the CFL bound such that tau is an exact
// integer multiple of dt. tau = 0 yields n_tau = 0 (valid only when the
// delay term is absent, i.e. a = 0).
StepInfo cfl_dt(double dt_bound, double tau,
                long max_slots = kDefaultMaxHistorySlots);
StepInfo cfl_dt(const Grid1D& g, double cfl, double tau,
                long max_slots = kDefaultMaxHistorySlots);
StepInfo cfl_dt(const Grid2D& g, double cfl, double tau,
                long max_slots = kDefaultMaxHistorySlots);

enum class StepStatus { ok, blow_up, nan_detected };
enum class Termination { completed, blow_up, nan_detected };

inline constexpr double kBlowUpThreshold = 1e12;

// Builds the state after the second-order Taylor start: u_curr holds the
// field at step 1, the history holds g(., -tau)..g(., -dt) and the
// centered velocity at step 0 (= u1).
SimState init_state(const InitialData& init, const PhysicalParams& p,
                    const Grid1D& g, const StepInfo& si);
SimState init_state(const InitialData& init, const PhysicalParams& p,
                    const Grid2D& g, const StepInfo& si);

// One leapfrog step: computes the field at step+1, pushes the centered
// velocity at the current step, and rotates the fields.
StepStatus step_1d(SimState& s, const PhysicalParams& p, const Grid1D& g,
                   double dt);
StepStatus step_2d(SimState& s, const PhysicalParams& p, const Grid2D& g,
                   double dt);

// Snapshot accessor for the newest fully-determined step (step - 1):
// displacement u_prev, centered velocity = newest history slot.
FieldView sample_view(const SimState& s, double dt);

struct Snapshot {
  double t = 0.0;
  std::vector<double> u, v;
};

struct RunConfig {
  PhysicalParams params;
  std::variant<Grid1D, Grid2D> grid;
  double t_end = 1.0;
  double cfl = 0.5;
  int sample_every = 1;
  int snapshot_every = 0;  // 0 = no snapshots
  LyapunovWeights weights{};  // only feeds the lyap column of the samples
  long max_history_slots = kDefaultMaxHistorySlots;
};

struct RunResult {
  std::vector<EnergySample> samples;
  std::vector<Snapshot> snapshots;
  Termination status = Termination::completed;
  long status_step = -1;  // step index at which integration stopped early
  StepInfo step_info{};
  long n_steps = 0;
  std::vector<double> final_u, final_v;  // fields at the last computed step
  double final_t = 0.0;
};

RunResult run(const RunConfig& cfg, const InitialData& init);

/// 1D system with undelayed interior damping 2a u_t + a^2 u and the
/// delayed boundary feedback u_x(L, t) = -k u_t(L, t - tau). The
/// boundary velocity history is a closed-form evaluator of u_t(L, s)
/// for s in [-tau, 0).
struct BoundaryDelayParams {
  double a = 1.0;
  double k = 0.5;
  double tau = 1.0;
};

struct ScalarEnergySeries {
  std::vector<double> t, e;
  Termination status = Termination::completed;
  long status_step = -1;
  StepInfo step_info{};
};

ScalarEnergySeries run_boundary_delay_1d(
    const BoundaryDelayParams& p, const Grid1D& g, std::span<const double> u0,
    std::span<const double> u1, const std::function<double(double)>& boundary_history,
    double t_end, double cfl, int sample_every,
    long max_slots = kDefaultMaxHistorySlots);

}  // namespace delaywave

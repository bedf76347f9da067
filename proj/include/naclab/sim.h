#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "naclab/action_set.h"
#include "naclab/kernels.h"
#include "naclab/lti.h"

namespace naclab {

/// Piecewise-constant disturbance: values[i] is applied on [times[i], times[i+1]).
/// Before the first breakpoint, or when empty, the disturbance is zero.
struct DisturbanceTable {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;

  bool empty() const { return times.empty(); }
  Eigen::VectorXd at(double t, int m) const;
  double sup_norm() const;
  bool operator==(const DisturbanceTable&) const = default;
};

enum class QuantizerKind { kUniform, kLogarithmicSymmetric, kMinimal, kExplicit };
std::string to_string(QuantizerKind k);

struct AnalysisSettings {
  std::vector<double> tau_grid{0.5, 1.0, 2.0, 5.0, 10.0};
  SprOptions spr;
  std::uint64_t seed = 12345;
  double sector_radius = 10.0;  // radius of the empirical sector probe
};

struct Scenario {
  std::string name;
  LtiSystem system;
  ExtendedActionSet actions;
  QuantizerKind quantizer = QuantizerKind::kUniform;
  Eigen::VectorXd x0{};
  double t_end = 50.0;
  double dt = 1e-3;
  double hold = 1e-3;
  DisturbanceTable disturbance{};
  AnalysisSettings analysis{};

  /// Throws PreconditionError unless dt > 0, hold >= dt, hold is an integer
  /// multiple of dt, t_end >= hold and every dimension agrees.
  void validate() const;
  int hold_steps() const;
  long total_steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> outputs;
  std::vector<Eigen::VectorXd> actions;       // nearest action held at this sample
  std::vector<Eigen::VectorXd> disturbances;  // disturbance added to the action
  bool diverged = false;
  bool chattering = false;
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  bool operator==(const Trajectory& o) const {
    return times == o.times && states == o.states && outputs == o.outputs &&
           actions == o.actions && disturbances == o.disturbances;
  }
};

/// Classic RK4 on x' = A x + B (u + d) with u = phi_ext(-C x) recomputed every
/// `hold` and d sampled at the start of each step.
Trajectory simulate(const Scenario& sc);

/// Independent simulations; the OpenMP backend runs them concurrently and
/// returns them in input order.
std::vector<Trajectory> simulate_batch(std::span<const Scenario> scenarios,
                                       kernels::Backend backend = kernels::Backend::kOpenMP);

/// First sample time after which |x| stays <= radius until the end.
std::optional<double> time_to_ball(const Trajectory& tr, double radius);

struct StabilityMetrics {
  double x0_norm = 0.0;
  double final_norm = 0.0;
  double terminal_radius = 0.0;  // max |x| over the last 20% of the horizon
  double omega = 0.0;
  double ball_radius = 0.0;
  std::optional<double> time_to_ball;
  bool fit_available = false;
  double eps_hat = 0.0;
  double c1_hat = 0.0;  // upper-envelope prefactor, relative to |x0|
  double c1_fit = 0.0;  // least-squares intercept prefactor, relative to |x0|
  double fit_start = 0.0;
  double fit_end = 0.0;
  std::size_t fit_samples = 0;
  bool envelope_ok = false;
};

/// eps_hat is the least-squares decay rate of log(max(|x| - omega, 1e-12))
/// over the decaying segment (samples before |x| - omega first drops to the
/// noise level max(1e-12, 1e-9 |x0|)); c1_hat is the smallest prefactor with
/// |x| <= c1_hat e^{-eps_hat t} |x0| + omega on that segment. envelope_ok
/// checks the envelope on every sample. `ball_radius` <= 0 selects omega, or
/// 1e-3 |x0| when omega is 0.
StabilityMetrics metrics(const Trajectory& tr, double omega, double ball_radius = 0.0);

struct RunComparison {
  Trajectory baseline;
  Trajectory extended;
  StabilityMetrics baseline_metrics;
  StabilityMetrics extended_metrics;
  bool extended_smaller = false;  // strict terminal-radius comparison
  double radius_ratio = 0.0;      // baseline / extended terminal radius
};

/// Throws PreconditionError unless both scenarios share system, x0, horizon and dt.
RunComparison compare_runs(const Scenario& baseline, const Scenario& extended,
                           double omega_baseline, double omega_extended);

/// Header t,x1..xn,y1..ym,u1..um,d1..dm; 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& tr);
/// Inverse of write_csv. Throws ParseError on malformed input.
Trajectory read_csv(std::istream& is);

}  // namespace naclab

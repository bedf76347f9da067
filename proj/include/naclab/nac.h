#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "naclab/action_set.h"
#include "naclab/quantizers.h"

namespace naclab {

/// Result of the finite nearest-action map over U.
struct NearestActionQuery {
  Eigen::VectorXd point;
  std::vector<int> result_set;  // all minimizers, ascending index
  int selected = 0;             // lowest index in result_set
};

/// argmin_{u in U} ||u - z||. For unit directions this is argmax <u, z>;
/// candidates within 1e-12 of the best inner product are ties.
NearestActionQuery phi(const ActionSet& set, const Eigen::VectorXd& z);

/// Nearest member of the extended set: phi(z) * Q(<z, phi(z)>), with a
/// negative projection clamped to 0 before quantization.
Eigen::VectorXd phi_ext(const ExtendedActionSet& ext, const Eigen::VectorXd& z);
/// Same, with an explicit quantizer; throws PreconditionError unless the
/// quantizer produces the scale grid of `ext`.
Eigen::VectorXd phi_ext(const ExtendedActionSet& ext, const ScalarQuantizer& q,
                        const Eigen::VectorXd& z);

struct InnerProductBoundReport {
  bool vacuous = false;  // 0 is the only nearest point of U u {0} to -y
  bool holds = true;
  std::vector<int> members;  // nonzero nearest directions checked
  double worst_margin = 0.0;  // min slack over both inequalities
};

/// For each nonzero u_j nearest to -y in U u {0}:
///   -||u_j|| ||y|| <= <u_j, y> <= -||u_j||^2 / 2.
/// Requires y != 0.
InnerProductBoundReport check_lemma2(const ActionSet& set, const Eigen::VectorXd& y);

/// Output-feedback nonlinearity split into a sector-bounded part and a
/// bounded disturbance: psi - disturbance = -phi_ext(-y).
struct SectorSplit {
  Eigen::VectorXd psi_value;
  Eigen::VectorXd delta_value;
  double k1 = 0.0;
  double k2 = 0.0;
  bool in_zero_cell = false;  // phi_ext(-y) == 0
  bool sector_ok = false;     // k1|y|^2 <= <psi, y> <= k2|y|^2
  bool disturbance_ok = false;  // ||delta_value|| <= delta_bar
};

/// Thrown by sector_split in strict mode when psi leaves [k1, k2].
class SectorViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SplitPolicy { kStrict, kReport };

/// psi = -phi_ext(-y) outside the zero cell and (k1+k2)/2 y inside it;
/// delta = phi_ext(-y) + psi. `delta_bar` is the Voronoi radius of the
/// extended set (delta * q1). Strict mode throws SectorViolation when the
/// sector fails and NumericalError when the disturbance bound fails.
SectorSplit sector_split(const ExtendedActionSet& ext, const Eigen::VectorXd& y,
                         double k1, double k2, double delta_bar,
                         SplitPolicy policy = SplitPolicy::kStrict);

/// Observed range of <psi, y>/|y|^2 over random y outside the zero cell with
/// |y| <= radius (directions uniform, radii uniform in (0, radius]).
struct EmpiricalSector {
  double k1 = 0.0;
  double k2 = 0.0;
  std::size_t samples = 0;
};
EmpiricalSector estimate_sector(const ExtendedActionSet& ext, double radius,
                                std::size_t samples, std::uint64_t seed);

}  // namespace naclab

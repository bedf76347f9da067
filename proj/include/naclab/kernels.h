#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "naclab/action_set.h"
#include "naclab/lti.h"
#include "naclab/quantizers.h"

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant that must produce bit-identical results; tests compare them
// and bench/ measures them.
namespace naclab::kernels {

enum class Backend { kSerial, kOpenMP };

struct SectorSweep {
  std::size_t violations = 0;
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
  double worst_eta = 0.0;  // sample attaining the smaller of the two margins
};

/// Margins of lower*eta^2 <= eta Q(eta) <= upper*eta^2 in units of eta^2;
/// a sample violates when a margin is below -tol.
SectorSweep sector_sweep(const ScalarQuantizer& q, double lower, double upper,
                         std::span<const double> etas, double tol, Backend backend);

struct FrequencySample {
  double omega = 0.0;
  double min_hermitian_eig = 0.0;  // lambda_min(H2 + H2^*)
  double sigma_min_left = 0.0;     // sigma_min(I + k1 G)
  double sigma_min_right = 0.0;    // sigma_min(I + k2 G)
  bool pole = false;               // j*omega numerically an eigenvalue of A
};

std::vector<FrequencySample> spr_sweep(const LtiSystem& sys, double k1, double k2,
                                       std::span<const double> omegas, Backend backend);

/// phi_ext evaluated at every point (natural quantizer of the scale set).
std::vector<Eigen::VectorXd> phi_ext_batch(const ExtendedActionSet& ext,
                                           std::span<const Eigen::VectorXd> points,
                                           Backend backend);

/// Worker count the OpenMP variants will use.
int max_threads();

}  // namespace naclab::kernels

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "naclab/action_set.h"

namespace naclab {

/// Symmetric uniform quantizer, floor(eta/lambda + 1/2) * lambda.
struct UniformQuantizer {
  double lambda = 1.0;
};

/// Standard logarithmic quantizer. Rounds the exponent, not the value, so it
/// does not select the nearest grid point; kept only as a comparison witness.
struct LogQuantizer {
  double lambda = 2.0;
};

/// Logarithmic quantizer whose output is the Euclidean-nearest member of
/// {0} u {+-lambda^k}; midpoints between neighbouring powers map upward.
struct SymmetricLogQuantizer {
  double lambda = 2.0;
};

/// Nearest member of an arbitrary nonnegative scale grid, ties upward.
struct GenericQuantizer {
  ScaleSet scales;
};

double quantize_uniform(const UniformQuantizer& q, double eta);
double quantize_log(const LogQuantizer& q, double eta);
double quantize_symlog(const SymmetricLogQuantizer& q, double eta);
/// Requires eta >= 0.
double quantize_generic(const GenericQuantizer& q, double eta);

/// Quantizers admissible for the decomposed nearest-action map (all obey the
/// nearest-point rule on nonnegative inputs).
using ScalarQuantizer =
    std::variant<UniformQuantizer, SymmetricLogQuantizer, GenericQuantizer>;

/// Uniform kind -> UniformQuantizer, logarithmic -> SymmetricLogQuantizer,
/// explicit -> GenericQuantizer.
ScalarQuantizer natural_quantizer(const ScaleSet& scales);
/// True when `q` produces values on the grid described by `scales`.
bool quantizer_matches(const ScalarQuantizer& q, const ScaleSet& scales);
double quantize(const ScalarQuantizer& q, double eta);
std::string describe(const ScalarQuantizer& q);

struct SectorCheckReport {
  bool pass = false;
  std::size_t samples = 0;
  std::size_t violations = 0;
  // Smallest slack of eta*Q(eta) against each bound, in units of eta^2.
  // Negative means violated.
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
  double worst_eta = 0.0;
  double lower_coeff = 0.0;
  double upper_coeff = 0.0;
};

/// (1 - lambda/(2 sigma)) eta^2 <= eta Q(eta) <= (1 + lambda/(2 sigma)) eta^2
/// on every sample eta >= sigma. Samples below sigma are rejected.
/// Throws PreconditionError when sigma < lambda/2.
SectorCheckReport verify_sector_uniform(const UniformQuantizer& q, double sigma,
                                        std::span<const double> samples);

/// 2/(lambda+1) eta^2 <= eta Q(eta) <= 2 lambda/(lambda+1) eta^2 on eta >= 0.
SectorCheckReport verify_sector_symlog(const SymmetricLogQuantizer& q,
                                       std::span<const double> samples);

/// n log-spaced points on [lo, hi] inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

}  // namespace naclab

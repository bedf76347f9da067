#include "naclab/quantizers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "naclab/errors.h"
#include "naclab/kernels.h"

namespace naclab {

namespace {

constexpr double kSectorTol = 1e-12;

void require_finite(double eta) {
  if (!std::isfinite(eta)) throw PreconditionError("quantizer input is not finite");
}

// Pushes x up by a few ulps before floor() so that exact boundary values in
// exponent space are not misclassified by log rounding.
double nudged_floor(double x) {
  return std::floor(x + 4.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(x)));
}

double sign(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

double quantize_uniform(const UniformQuantizer& q, double eta) {
  require_finite(eta);
  return std::floor(eta / q.lambda + 0.5) * q.lambda;
}

double quantize_log(const LogQuantizer& q, double eta) {
  require_finite(eta);
  if (eta == 0.0) return 0.0;
  const double k = nudged_floor(0.5 + std::log(std::abs(eta)) / std::log(q.lambda));
  return sign(eta) * std::pow(q.lambda, k);
}

double quantize_symlog(const SymmetricLogQuantizer& q, double eta) {
  require_finite(eta);
  if (eta == 0.0) return 0.0;
  const double lam = q.lambda;
  const double a = std::abs(eta);
  const double k = nudged_floor(std::log(2.0 * lam * a / (lam + 1.0)) / std::log(lam));
  // The closed form can be one exponent off when a sits within rounding of a
  // midpoint; settle it by direct distance comparison, ties upward.
  double best = std::pow(lam, k + 1.0);
  for (double c : {std::pow(lam, k), std::pow(lam, k - 1.0)})
    if (std::abs(a - c) < std::abs(a - best)) best = c;
  return sign(eta) * best;
}

double quantize_generic(const GenericQuantizer& q, double eta) {
  require_finite(eta);
  if (eta < 0.0) throw PreconditionError("generic quantizer needs eta >= 0");
  const ScaleSet& s = q.scales;
  switch (s.kind()) {
    case ScaleSet::Kind::kUniform:
      return quantize_uniform({s.lambda()}, eta);
    case ScaleSet::Kind::kLogarithmic:
      return quantize_symlog({s.lambda()}, eta);
    case ScaleSet::Kind::kExplicit: {
      const auto& g = s.scales();
      const auto it = std::lower_bound(g.begin(), g.end(), eta);
      if (it == g.end()) return g.back();
      const double hi = *it;
      const double lo = it == g.begin() ? 0.0 : *(it - 1);
      return (eta - lo < hi - eta) ? lo : hi;
    }
  }
  return 0.0;
}

ScalarQuantizer natural_quantizer(const ScaleSet& scales) {
  switch (scales.kind()) {
    case ScaleSet::Kind::kUniform: return UniformQuantizer{scales.lambda()};
    case ScaleSet::Kind::kLogarithmic: return SymmetricLogQuantizer{scales.lambda()};
    case ScaleSet::Kind::kExplicit: return GenericQuantizer{scales};
  }
  return GenericQuantizer{scales};
}

bool quantizer_matches(const ScalarQuantizer& q, const ScaleSet& scales) {
  if (const auto* u = std::get_if<UniformQuantizer>(&q))
    return scales.kind() == ScaleSet::Kind::kUniform && u->lambda == scales.lambda();
  if (const auto* l = std::get_if<SymmetricLogQuantizer>(&q))
    return scales.kind() == ScaleSet::Kind::kLogarithmic && l->lambda == scales.lambda();
  return std::get<GenericQuantizer>(q).scales == scales;
}

double quantize(const ScalarQuantizer& q, double eta) {
  return std::visit(
      [eta](const auto& quant) -> double {
        using T = std::decay_t<decltype(quant)>;
        if constexpr (std::is_same_v<T, UniformQuantizer>)
          return quantize_uniform(quant, eta);
        else if constexpr (std::is_same_v<T, SymmetricLogQuantizer>)
          return quantize_symlog(quant, eta);
        else
          return quantize_generic(quant, eta);
      },
      q);
}

std::string describe(const ScalarQuantizer& q) {
  if (const auto* u = std::get_if<UniformQuantizer>(&q))
    return "uniform(lambda=" + std::to_string(u->lambda) + ")";
  if (const auto* l = std::get_if<SymmetricLogQuantizer>(&q))
    return "logarithmic-symmetric(lambda=" + std::to_string(l->lambda) + ")";
  return "generic(" + to_string(std::get<GenericQuantizer>(q).scales.kind()) + ")";
}

namespace {

SectorCheckReport run_sector(const ScalarQuantizer& q, double lower, double upper,
                             std::span<const double> samples) {
  for (double eta : samples)
    if (!std::isfinite(eta)) throw PreconditionError("sector sample is not finite");
  const kernels::SectorSweep sweep =
      kernels::sector_sweep(q, lower, upper, samples, kSectorTol, kernels::Backend::kOpenMP);
  SectorCheckReport r;
  r.samples = samples.size();
  r.violations = sweep.violations;
  r.worst_lower_margin = sweep.worst_lower_margin;
  r.worst_upper_margin = sweep.worst_upper_margin;
  r.worst_eta = sweep.worst_eta;
  r.lower_coeff = lower;
  r.upper_coeff = upper;
  r.pass = sweep.violations == 0;
  return r;
}

}  // namespace

SectorCheckReport verify_sector_uniform(const UniformQuantizer& q, double sigma,
                                        std::span<const double> samples) {
  if (!(sigma >= 0.5 * q.lambda))
    throw PreconditionError("uniform sector bound needs sigma >= lambda/2 (sigma=" +
                            std::to_string(sigma) + ", lambda=" + std::to_string(q.lambda) + ")");
  for (double eta : samples)
    if (eta < sigma) throw PreconditionError("uniform sector sample below sigma");
  const double h = q.lambda / (2.0 * sigma);
  return run_sector(q, 1.0 - h, 1.0 + h, samples);
}

SectorCheckReport verify_sector_symlog(const SymmetricLogQuantizer& q,
                                       std::span<const double> samples) {
  if (!(q.lambda > 1.0)) throw PreconditionError("logarithmic base must exceed 1");
  for (double eta : samples)
    if (eta < 0.0) throw PreconditionError("symmetric-log sector sample is negative");
  const double lam = q.lambda;
  return run_sector(q, 2.0 / (lam + 1.0), 2.0 * lam / (lam + 1.0), samples);
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n < 2)
    throw PreconditionError("log_spaced needs 0 < lo <= hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace naclab

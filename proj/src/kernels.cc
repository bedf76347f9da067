#include "naclab/kernels.h"

#include <algorithm>
#include <limits>

#include <omp.h>

#include "naclab/errors.h"
#include "naclab/nac.h"

namespace naclab::kernels {

namespace {

struct SectorPartial {
  std::size_t violations = 0;
  double min_lower = std::numeric_limits<double>::infinity();
  double min_upper = std::numeric_limits<double>::infinity();
  double best_key = std::numeric_limits<double>::infinity();
  std::size_t best_index = std::numeric_limits<std::size_t>::max();

  void add(std::size_t i, double lower_margin, double upper_margin, double tol) {
    if (lower_margin < -tol || upper_margin < -tol) ++violations;
    min_lower = std::min(min_lower, lower_margin);
    min_upper = std::min(min_upper, upper_margin);
    const double key = std::min(lower_margin, upper_margin);
    if (key < best_key || (key == best_key && i < best_index)) {
      best_key = key;
      best_index = i;
    }
  }

  void merge(const SectorPartial& o) {
    violations += o.violations;
    min_lower = std::min(min_lower, o.min_lower);
    min_upper = std::min(min_upper, o.min_upper);
    if (o.best_key < best_key || (o.best_key == best_key && o.best_index < best_index)) {
      best_key = o.best_key;
      best_index = o.best_index;
    }
  }
};

// Margins in units of eta^2; eta = 0 satisfies both bounds with equality.
inline void sector_margins(const ScalarQuantizer& q, double lower, double upper,
                           double eta, double* lm, double* um) {
  if (eta == 0.0) {
    *lm = *um = 0.0;
    return;
  }
  const double ratio = quantize(q, eta) / eta;
  *lm = ratio - lower;
  *um = upper - ratio;
}

FrequencySample evaluate_frequency(const LtiSystem& sys, double k1, double k2,
                                   double omega) {
  FrequencySample f;
  f.omega = omega;
  Eigen::MatrixXcd g;
  try {
    g = eval_transfer(sys, {0.0, omega});
  } catch (const NumericalError&) {
    f.pole = true;
    f.min_hermitian_eig = -std::numeric_limits<double>::infinity();
    return f;
  }
  const int m = sys.m();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd left = eye + k1 * g;
  const Eigen::MatrixXcd right = eye + k2 * g;
  f.sigma_min_left = Eigen::JacobiSVD<Eigen::MatrixXcd>(left).singularValues().minCoeff();
  f.sigma_min_right = Eigen::JacobiSVD<Eigen::MatrixXcd>(right).singularValues().minCoeff();
  // H2 = right * left^{-1}  <=>  left^T H2^T = right^T.
  const Eigen::MatrixXcd h2 =
      left.transpose().partialPivLu().solve(right.transpose()).transpose();
  const Eigen::MatrixXcd herm = h2 + h2.adjoint();
  f.min_hermitian_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  return f;
}

}  // namespace

SectorSweep sector_sweep(const ScalarQuantizer& q, double lower, double upper,
                         std::span<const double> etas, double tol, Backend backend) {
  const std::size_t n = etas.size();
  SectorPartial total;
  if (backend == Backend::kSerial) {
    for (std::size_t i = 0; i < n; ++i) {
      double lm, um;
      sector_margins(q, lower, upper, etas[i], &lm, &um);
      total.add(i, lm, um, tol);
    }
  } else {
    std::vector<SectorPartial> partials(max_threads());
#pragma omp parallel
    {
      SectorPartial& local = partials[omp_get_thread_num()];
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double lm, um;
        sector_margins(q, lower, upper, etas[i], &lm, &um);
        local.add(static_cast<std::size_t>(i), lm, um, tol);
      }
    }
    for (const auto& p : partials) total.merge(p);
  }
  SectorSweep s;
  if (n == 0) return s;
  s.violations = total.violations;
  s.worst_lower_margin = total.min_lower;
  s.worst_upper_margin = total.min_upper;
  s.worst_eta = etas[total.best_index];
  return s;
}

std::vector<FrequencySample> spr_sweep(const LtiSystem& sys, double k1, double k2,
                                       std::span<const double> omegas, Backend backend) {
  std::vector<FrequencySample> out(omegas.size());
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());
  if (backend == Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = evaluate_frequency(sys, k1, k2, omegas[i]);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = evaluate_frequency(sys, k1, k2, omegas[i]);
  }
  return out;
}

std::vector<Eigen::VectorXd> phi_ext_batch(const ExtendedActionSet& ext,
                                           std::span<const Eigen::VectorXd> points,
                                           Backend backend) {
  const ScalarQuantizer quant = natural_quantizer(ext.scales);
  std::vector<Eigen::VectorXd> out(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  if (backend == Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = phi_ext(ext, quant, points[i]);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = phi_ext(ext, quant, points[i]);
  }
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace naclab::kernels

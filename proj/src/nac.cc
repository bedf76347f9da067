#include "naclab/nac.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "naclab/errors.h"

namespace naclab {

namespace {

void require_dim(const ActionSet& set, const Eigen::VectorXd& z) {
  if (z.size() != set.dim())
    throw PreconditionError("point has dimension " + std::to_string(z.size()) +
                            ", action set has dimension " + std::to_string(set.dim()));
}

}  // namespace

NearestActionQuery phi(const ActionSet& set, const Eigen::VectorXd& z) {
  require_dim(set, z);
  const Eigen::VectorXd ip = set.rows() * z;
  const double best = ip.maxCoeff();
  NearestActionQuery q;
  q.point = z;
  for (int i = 0; i < ip.size(); ++i)
    if (ip(i) >= best - kGeometryTol) q.result_set.push_back(i);
  q.selected = q.result_set.front();
  return q;
}

Eigen::VectorXd phi_ext(const ExtendedActionSet& ext, const ScalarQuantizer& quant,
                        const Eigen::VectorXd& z) {
  if (!quantizer_matches(quant, ext.scales))
    throw PreconditionError("quantizer " + describe(quant) + " does not match the " +
                            to_string(ext.scales.kind()) + " scale set");
  require_dim(ext.base, z);
  const Eigen::VectorXd ip = ext.base.rows() * z;
  Eigen::Index sel = 0;
  const double best = ip.maxCoeff(&sel);
  // Lowest index among ties, consistent with phi().
  for (Eigen::Index i = 0; i < sel; ++i)
    if (ip(i) >= best - kGeometryTol) {
      sel = i;
      break;
    }
  const double scale = quantize(quant, std::max(ip(sel), 0.0));
  return scale * ext.base.rows().row(sel).transpose();
}

Eigen::VectorXd phi_ext(const ExtendedActionSet& ext, const Eigen::VectorXd& z) {
  return phi_ext(ext, natural_quantizer(ext.scales), z);
}

InnerProductBoundReport check_lemma2(const ActionSet& set, const Eigen::VectorXd& y) {
  require_dim(set, y);
  const double ny = y.norm();
  if (!(ny > 0.0)) throw PreconditionError("check_lemma2 needs y != 0");
  const Eigen::VectorXd ip = set.rows() * (-y);
  const double best = ip.maxCoeff();
  InnerProductBoundReport r;
  // |-y - u|^2 = |y|^2 - 2<u,-y> + 1 versus |y|^2 for the zero action.
  if (2.0 * best - 1.0 < -kGeometryTol) {
    r.vacuous = true;
    return r;
  }
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ip.size(); ++i) {
    if (ip(i) < best - kGeometryTol) continue;
    r.members.push_back(i);
    const double inner = -ip(i);  // <u_i, y>
    const double lower_slack = inner + ny;
    const double upper_slack = -0.5 - inner;
    r.worst_margin = std::min({r.worst_margin, lower_slack, upper_slack});
  }
  r.holds = r.worst_margin >= -kGeometryTol;
  return r;
}

SectorSplit sector_split(const ExtendedActionSet& ext, const Eigen::VectorXd& y,
                         double k1, double k2, double delta_bar, SplitPolicy policy) {
  if (!(k1 < k2)) throw PreconditionError("sector_split needs k1 < k2");
  SectorSplit s;
  s.k1 = k1;
  s.k2 = k2;
  const Eigen::VectorXd u = phi_ext(ext, -y);
  s.in_zero_cell = u.squaredNorm() == 0.0;
  s.psi_value = s.in_zero_cell ? Eigen::VectorXd(0.5 * (k1 + k2) * y) : Eigen::VectorXd(-u);
  s.delta_value = u + s.psi_value;

  const double ny2 = y.squaredNorm();
  const double inner = s.psi_value.dot(y);
  s.sector_ok = inner >= (k1 - 1e-12) * ny2 && inner <= (k2 + 1e-12) * ny2;
  s.disturbance_ok = s.delta_value.norm() <= delta_bar * (1.0 + 1e-12);

  if (policy == SplitPolicy::kStrict) {
    if (!s.sector_ok)
      throw SectorViolation("<psi, y>/|y|^2 = " + std::to_string(inner / ny2) +
                            " outside [" + std::to_string(k1) + ", " + std::to_string(k2) + "]");
    if (!s.disturbance_ok)
      throw NumericalError("disturbance norm " + std::to_string(s.delta_value.norm()) +
                           " exceeds bound " + std::to_string(delta_bar));
  }
  return s;
}

EmpiricalSector estimate_sector(const ExtendedActionSet& ext, double radius,
                                std::size_t samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw PreconditionError("estimate_sector needs radius > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EmpiricalSector e;
  e.k1 = std::numeric_limits<double>::infinity();
  e.k2 = -std::numeric_limits<double>::infinity();
  const int m = ext.base.dim();
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd y(m);
    for (int k = 0; k < m; ++k) y(k) = normal(rng);
    y *= radius * (1.0 - unit(rng)) / y.norm();
    const Eigen::VectorXd u = phi_ext(ext, -y);
    if (u.squaredNorm() == 0.0) continue;
    const double ratio = (-u).dot(y) / y.squaredNorm();
    e.k1 = std::min(e.k1, ratio);
    e.k2 = std::max(e.k2, ratio);
    ++e.samples;
  }
  return e;
}

}  // namespace naclab

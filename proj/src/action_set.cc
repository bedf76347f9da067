#include "naclab/action_set.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "naclab/errors.h"

namespace naclab {

namespace {

constexpr double kPi = std::numbers::pi;

struct CoverSearch {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd direction;
};

double max_inner(const Eigen::MatrixXd& rows, const Eigen::VectorXd& d) {
  return (rows * d).maxCoeff();
}

// Log-sum-exp smoothing of max_i <u_i, d> at temperature t, with gradient.
double smoothed_max(const Eigen::MatrixXd& rows, const Eigen::VectorXd& d,
                    double t, Eigen::VectorXd* grad) {
  const Eigen::VectorXd ip = rows * d;
  const double top = ip.maxCoeff();
  const Eigen::ArrayXd w = (t * (ip.array() - top)).exp();
  const double total = w.sum();
  if (grad != nullptr) *grad = rows.transpose() * (w / total).matrix();
  return top + std::log(total) / t;
}

// The point equidistant (in inner product) from the active rows that lies in
// their span: the KKT point of min_d max_{i in S} <u_i, d> on the sphere.
bool polish_active(const Eigen::MatrixXd& rows, const std::vector<int>& active,
                   CoverSearch* best) {
  const int m = static_cast<int>(rows.cols());
  Eigen::MatrixXd sub(active.size(), m);
  for (std::size_t k = 0; k < active.size(); ++k) sub.row(k) = rows.row(active[k]);
  const Eigen::MatrixXd gram = sub * sub.transpose();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(active.size());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  const Eigen::VectorXd w = cod.solve(ones);
  if ((gram * w - ones).norm() > 1e-9) return false;
  if (w.minCoeff() < -1e-9) return false;
  Eigen::VectorXd d = sub.transpose() * w;
  const double len = d.norm();
  if (!(len > 0.0) || !std::isfinite(len)) return false;
  d /= len;
  const double value = max_inner(rows, d);
  if (value < best->value) {
    best->value = value;
    best->direction = d;
  }
  return true;
}

void refine(const Eigen::MatrixXd& rows, Eigen::VectorXd d, CoverSearch* best) {
  for (double t : {10.0, 30.0, 1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6}) {
    double step = 0.5 / std::sqrt(t);
    Eigen::VectorXd grad;
    double g = smoothed_max(rows, d, t, &grad);
    for (int it = 0; it < 300 && step > 1e-15; ++it) {
      const Eigen::VectorXd tangent = grad - grad.dot(d) * d;
      if (tangent.norm() < 1e-15) break;
      const Eigen::VectorXd trial = (d - step * tangent).normalized();
      Eigen::VectorXd trial_grad;
      const double gt = smoothed_max(rows, trial, t, &trial_grad);
      if (gt < g - 1e-4 * step * tangent.squaredNorm()) {
        d = trial;
        g = gt;
        grad = trial_grad;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
  }
  const double value = max_inner(rows, d);
  if (value < best->value) {
    best->value = value;
    best->direction = d;
  }
  const Eigen::VectorXd ip = rows * d;
  for (double band : {1e-4, 1e-5, 1e-6, 1e-8}) {
    std::vector<int> active;
    for (int i = 0; i < ip.size(); ++i)
      if (ip(i) >= value - band) active.push_back(i);
    polish_active(rows, active, best);
  }
}

// Randomized minimization of max_i <u_i, d> over the unit sphere.
CoverSearch min_max_inner(const Eigen::MatrixXd& rows, const GeometryOptions& opts) {
  const int m = static_cast<int>(rows.cols());
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;

  std::vector<std::pair<double, Eigen::VectorXd>> starts;
  starts.reserve(opts.sphere_samples + rows.rows());
  for (int s = 0; s < opts.sphere_samples; ++s) {
    Eigen::VectorXd d(m);
    for (int k = 0; k < m; ++k) d(k) = normal(rng);
    d.normalize();
    starts.emplace_back(max_inner(rows, d), std::move(d));
  }
  for (int i = 0; i < rows.rows(); ++i) {
    Eigen::VectorXd d = -rows.row(i).transpose();
    starts.emplace_back(max_inner(rows, d), std::move(d));
  }
  const std::size_t keep =
      std::min<std::size_t>(std::max(opts.local_starts, 1), starts.size());
  std::partial_sort(starts.begin(), starts.begin() + keep, starts.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });

  CoverSearch best;
  for (std::size_t k = 0; k < keep; ++k) {
    if (starts[k].first < best.value) {
      best.value = starts[k].first;
      best.direction = starts[k].second;
    }
    refine(rows, starts[k].second, &best);
  }
  return best;
}

std::vector<double> sorted_angles(const ActionSet& set) {
  std::vector<double> angles;
  angles.reserve(set.size());
  for (int i = 0; i < set.size(); ++i)
    angles.push_back(std::atan2(set.rows()(i, 1), set.rows()(i, 0)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

// Largest angular gap between consecutive planar directions and its bisector.
std::pair<double, double> largest_gap(const ActionSet& set) {
  const auto angles = sorted_angles(set);
  double gap = 2.0 * kPi - (angles.back() - angles.front());
  double mid = angles.back() + 0.5 * gap;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double g = angles[i] - angles[i - 1];
    if (g > gap) {
      gap = g;
      mid = angles[i - 1] + 0.5 * g;
    }
  }
  return {gap, mid};
}

int matrix_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * s(0)) ++r;
  return r;
}

// Calls fn(subset) for every size-k subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::string to_string(GeometryMethod m) {
  switch (m) {
    case GeometryMethod::kExact2d: return "exact2d";
    case GeometryMethod::kVertexEnum: return "vertex-enum";
    case GeometryMethod::kMonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

ActionSet ActionSet::from_directions(const std::vector<Eigen::VectorXd>& dirs) {
  if (dirs.empty()) throw PreconditionError("action set is empty");
  const auto m = dirs.front().size();
  if (m == 0) throw PreconditionError("action directions have dimension 0");
  Eigen::MatrixXd rows(dirs.size(), m);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (dirs[i].size() != m)
      throw PreconditionError("direction " + std::to_string(i) + " has dimension " +
                              std::to_string(dirs[i].size()) + ", expected " +
                              std::to_string(m));
    if (std::abs(dirs[i].norm() - 1.0) > kGeometryTol)
      throw PreconditionError("direction " + std::to_string(i) +
                              " is not a unit vector (norm " +
                              std::to_string(dirs[i].norm()) + ")");
    rows.row(i) = dirs[i].transpose();
  }
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = i + 1; j < rows.rows(); ++j)
      if ((rows.row(i) - rows.row(j)).norm() <= kGeometryTol)
        throw PreconditionError("directions " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide");
  return ActionSet(std::move(rows));
}

ActionSet ActionSet::from_angles(std::span<const double> angles) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(angles.size());
  for (double t : angles) dirs.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
  return from_directions(dirs);
}

A2Result validate_a2(const ActionSet& set, const GeometryOptions& opts) {
  const int m = set.dim();
  const int p = set.size();
  A2Result r;
  r.method = m <= 2 ? GeometryMethod::kExact2d : GeometryMethod::kMonteCarlo;
  if (p < m + 1) {
    r.reason = "0 is not in the interior of conv(U): " + std::to_string(p) +
               " directions cannot span a full-dimensional polytope in R^" +
               std::to_string(m);
    return r;
  }
  if (m == 1) {
    r.holds = set.rows().maxCoeff() > 0.0 && set.rows().minCoeff() < 0.0;
    if (!r.holds) r.reason = "0 is not in the interior of conv(U): all directions share a sign";
    return r;
  }
  if (m == 2) {
    const auto [gap, mid] = largest_gap(set);
    r.holds = gap < kPi - kGeometryTol;
    if (!r.holds) {
      r.reason = "0 is not in the interior of conv(U): angular gap of " +
                 std::to_string(gap) + " rad >= pi";
      r.separating_direction = Eigen::Vector2d(std::cos(mid), std::sin(mid));
    }
    return r;
  }
  if (matrix_rank(set.rows()) < m) {
    r.reason = "0 is not in the interior of conv(U): directions lie in a hyperplane";
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(set.rows(), Eigen::ComputeFullV);
    r.separating_direction = svd.matrixV().col(m - 1);
    return r;
  }
  const CoverSearch cover = min_max_inner(set.rows(), opts);
  r.holds = cover.value > kGeometryTol;
  if (!r.holds) {
    r.reason = "0 is not in the interior of conv(U): found direction with "
               "max <u_i, d> = " + std::to_string(cover.value);
    r.separating_direction = cover.direction;
  }
  return r;
}

AlphaResult compute_alpha(const ActionSet& set, const GeometryOptions& opts) {
  const int m = set.dim();
  AlphaResult r;
  if (m == 1) {
    r.method = GeometryMethod::kVertexEnum;
    r.value = std::min(set.rows().maxCoeff(), -set.rows().minCoeff());
  } else if (m == 2) {
    r.method = GeometryMethod::kExact2d;
    r.value = std::cos(0.5 * largest_gap(set).first);
  } else {
    r.method = GeometryMethod::kMonteCarlo;
    r.estimate = true;
    r.value = min_max_inner(set.rows(), opts).value;
  }
  r.sector_applicable = r.value > kGeometryTol;
  return r;
}

DeltaResult compute_delta(const ActionSet& set, const GeometryOptions& opts) {
  const int m = set.dim();
  const A2Result a2 = validate_a2(set, opts);
  if (!a2.holds)
    throw PreconditionError("Voronoi cell of 0 is unbounded: " + a2.reason);

  DeltaResult r;
  if (m >= 4) {
    // Ray length from 0 to the cell boundary along unit d is
    // 1 / (2 max_i <u_i, d>); the farthest vertex minimizes that maximum.
    r.method = GeometryMethod::kMonteCarlo;
    r.lower_bound = true;
    r.value = 0.5 / min_max_inner(set.rows(), opts).value;
    return r;
  }
  r.method = m == 2 ? GeometryMethod::kExact2d : GeometryMethod::kVertexEnum;
  const Eigen::MatrixXd& rows = set.rows();
  double best = -1.0;
  for_each_subset(set.size(), m, [&](const std::vector<int>& idx) {
    Eigen::MatrixXd sub(m, m);
    for (int k = 0; k < m; ++k) sub.row(k) = rows.row(idx[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() < m) return;
    const Eigen::VectorXd x = lu.solve(Eigen::VectorXd::Constant(m, 0.5));
    if ((rows * x).maxCoeff() <= 0.5 + kGeometryTol) best = std::max(best, x.norm());
  });
  if (best < 0.0) throw NumericalError("no feasible vertex of the Voronoi cell of 0");
  r.value = best;
  return r;
}

GeometryCertificate certify_geometry(const ActionSet& set,
                                     const GeometryOptions& opts) {
  GeometryCertificate cert;
  const A2Result a2 = validate_a2(set, opts);
  cert.a2_holds = a2.holds;
  cert.reason = a2.reason;
  const AlphaResult alpha = compute_alpha(set, opts);
  cert.alpha = alpha.value;
  cert.alpha_estimate = alpha.estimate;
  cert.method = alpha.method;
  if (!a2.holds) {
    cert.delta = std::numeric_limits<double>::infinity();
    return cert;
  }
  const DeltaResult delta = compute_delta(set, opts);
  cert.delta = delta.value;
  cert.delta_lower_bound = delta.lower_bound;
  if (delta.method == GeometryMethod::kMonteCarlo || alpha.estimate)
    cert.method = GeometryMethod::kMonteCarlo;
  else
    cert.method = delta.method;
  if (!alpha.sector_applicable)
    cert.reason = "covering constant alpha <= 0: no positive sector lower bound";
  return cert;
}

UniformSectorConstants sector_constants_uniform(double delta, double alpha) {
  if (!(delta >= 0.5 - kGeometryTol))
    throw PreconditionError("uniform extension needs delta >= 1/2, got " +
                            std::to_string(delta));
  if (!(alpha > 0.0 && alpha <= 1.0 + kGeometryTol))
    throw PreconditionError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  UniformSectorConstants c;
  const double h = 1.0 / (2.0 * delta);
  c.pair = {alpha * (1.0 - h), 1.0 + h};
  c.degenerate = std::abs(c.pair.k1) <= kGeometryTol;
  if (c.degenerate) c.pair.k1 = 0.0;
  return c;
}

LogSectorConstants sector_constants_log(double lambda, double alpha) {
  if (!(lambda > 1.0))
    throw PreconditionError("logarithmic base must exceed 1, got " + std::to_string(lambda));
  if (!(alpha > 0.0 && alpha <= 1.0 + kGeometryTol))
    throw PreconditionError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  const double lo = 2.0 / (lambda + 1.0);
  const double hi = 2.0 * lambda / (lambda + 1.0);
  LogSectorConstants c;
  c.composed = {alpha * lo, hi};
  c.swapped = {alpha * hi, lo};
  c.disagree = std::abs(c.composed.k1 - c.swapped.k1) > kGeometryTol ||
               std::abs(c.composed.k2 - c.swapped.k2) > kGeometryTol;
  return c;
}

std::string to_string(ScaleSet::Kind k) {
  switch (k) {
    case ScaleSet::Kind::kUniform: return "uniform";
    case ScaleSet::Kind::kLogarithmic: return "logarithmic-symmetric";
    case ScaleSet::Kind::kExplicit: return "explicit";
  }
  return "unknown";
}

ScaleSet ScaleSet::uniform(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw PreconditionError("uniform step must be positive, got " + std::to_string(lambda));
  ScaleSet s;
  s.kind_ = Kind::kUniform;
  s.lambda_ = lambda;
  return s;
}

ScaleSet ScaleSet::logarithmic(double lambda, int min_exponent) {
  if (!(lambda > 1.0) || !std::isfinite(lambda))
    throw PreconditionError("logarithmic base must exceed 1, got " + std::to_string(lambda));
  if (!(std::pow(lambda, min_exponent) > 0.0))
    throw PreconditionError("min_exponent underflows to zero");
  ScaleSet s;
  s.kind_ = Kind::kLogarithmic;
  s.lambda_ = lambda;
  s.min_exponent_ = min_exponent;
  return s;
}

ScaleSet ScaleSet::explicit_list(std::vector<double> scales) {
  if (scales.empty()) throw PreconditionError("explicit scale list is empty");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i]))
      throw PreconditionError("explicit scales must be positive and finite");
    if (i > 0 && !(scales[i] > scales[i - 1]))
      throw PreconditionError("explicit scales must be strictly increasing");
  }
  ScaleSet s;
  s.kind_ = Kind::kExplicit;
  s.scales_ = std::move(scales);
  return s;
}

double ScaleSet::q1() const {
  switch (kind_) {
    case Kind::kUniform: return lambda_;
    case Kind::kLogarithmic: return std::pow(lambda_, min_exponent_);
    case Kind::kExplicit: return scales_.front();
  }
  return 0.0;
}

std::vector<double> ScaleSet::enumerate(double radius) const {
  if (!(radius > 0.0)) throw PreconditionError("enumeration radius must be positive");
  std::vector<double> out;
  switch (kind_) {
    case Kind::kUniform: {
      if (radius / lambda_ > 1e7) throw PreconditionError("enumeration too large");
      for (long k = 1;; ++k) {
        const double q = static_cast<double>(k) * lambda_;
        out.push_back(q);
        if (q > radius) break;
      }
      break;
    }
    case Kind::kLogarithmic: {
      for (int k = min_exponent_;; ++k) {
        const double q = std::pow(lambda_, k);
        out.push_back(q);
        if (q > radius) break;
        if (out.size() > 10'000'000) throw PreconditionError("enumeration too large");
      }
      break;
    }
    case Kind::kExplicit: {
      for (double q : scales_) {
        out.push_back(q);
        if (q > radius) break;
      }
      break;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> enumerate_truncated(const ExtendedActionSet& ext,
                                                 double radius) {
  const std::vector<double> scales = ext.scales.enumerate(radius);
  std::vector<Eigen::VectorXd> out;
  out.reserve(1 + scales.size() * ext.base.size());
  out.push_back(Eigen::VectorXd::Zero(ext.base.dim()));
  for (int i = 0; i < ext.base.size(); ++i) {
    const Eigen::VectorXd u = ext.base.direction(i);
    for (double q : scales) out.push_back(q * u);
  }
  return out;
}

}  // namespace naclab

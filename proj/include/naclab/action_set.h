#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace naclab {

inline constexpr double kGeometryTol = 1e-12;

/// Finite set of distinct unit-norm action directions in R^m.
///
/// Directions are stored as the rows of a p x m matrix so that all inner
/// products with a query point are a single matrix-vector product.
class ActionSet {
 public:
  /// Throws PreconditionError on an empty list, mixed dimensions, a direction
  /// whose norm differs from 1 by more than 1e-12, or duplicate directions.
  static ActionSet from_directions(const std::vector<Eigen::VectorXd>& dirs);
  /// Planar directions (cos t, sin t) for each angle t in radians.
  static ActionSet from_angles(std::span<const double> angles);

  int dim() const { return static_cast<int>(rows_.cols()); }
  int size() const { return static_cast<int>(rows_.rows()); }
  Eigen::VectorXd direction(int i) const { return rows_.row(i).transpose(); }
  const Eigen::MatrixXd& rows() const { return rows_; }

 private:
  explicit ActionSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}
  Eigen::MatrixXd rows_;
};

enum class GeometryMethod { kExact2d, kVertexEnum, kMonteCarlo };
std::string to_string(GeometryMethod m);

/// Controls the randomized searches used for m >= 3 (covering constant) and
/// m >= 4 (Voronoi radius). Fixed seed => identical results.
struct GeometryOptions {
  std::uint64_t seed = 12345;
  int sphere_samples = 20000;
  int local_starts = 16;
};

struct A2Result {
  bool holds = false;
  GeometryMethod method = GeometryMethod::kExact2d;
  std::string reason;  // empty when holds
  // A direction d with <u_i, d> <= 0 for all i, when one was found.
  Eigen::VectorXd separating_direction;
};

struct DeltaResult {
  double value = 0.0;
  GeometryMethod method = GeometryMethod::kExact2d;
  bool lower_bound = false;  // Monte Carlo: true radius may be larger
};

struct AlphaResult {
  double value = 0.0;
  GeometryMethod method = GeometryMethod::kExact2d;
  bool estimate = false;
  // False when value <= 0: no positive lower bound on <z, phi(z)>/|z|.
  bool sector_applicable = false;
};

struct GeometryCertificate {
  double delta = 0.0;
  double alpha = 0.0;
  bool a2_holds = false;
  GeometryMethod method = GeometryMethod::kExact2d;
  bool delta_lower_bound = false;
  bool alpha_estimate = false;
  std::string reason;
};

/// Decides whether 0 lies in the interior of conv(U).
/// m = 2: exact angular-gap test. m >= 3: rank test plus a randomized search
/// for a separating direction.
A2Result validate_a2(const ActionSet& set, const GeometryOptions& opts = {});

/// Smallest delta with V_{U u {0}}(0) inside the closed ball of radius delta.
/// The cell is {x : <u_i, x> <= 1/2}; delta is its largest vertex norm.
/// Throws PreconditionError when the cell is unbounded.
DeltaResult compute_delta(const ActionSet& set, const GeometryOptions& opts = {});

/// min over unit z of max_i <u_i, z>, the cosine of the covering half-angle.
AlphaResult compute_alpha(const ActionSet& set, const GeometryOptions& opts = {});

GeometryCertificate certify_geometry(const ActionSet& set,
                                     const GeometryOptions& opts = {});

struct SectorPair {
  double k1 = 0.0;
  double k2 = 0.0;
  bool ordered() const { return k1 < k2; }
};

struct UniformSectorConstants {
  SectorPair pair;
  bool degenerate = false;  // k1 == 0 (delta == 1/2)
};

/// k1 = alpha (1 - 1/(2 delta)), k2 = 1 + 1/(2 delta).
UniformSectorConstants sector_constants_uniform(double delta, double alpha);

/// Two conventions for the logarithmically extended set.
///  composed: alpha * 2/(lambda+1), 2 lambda/(lambda+1)  (quantizer sector
///            bounds pushed through the covering constant)
///  swapped:  alpha * 2 lambda/(lambda+1), 2/(lambda+1)  (lambda factor on the
///            other bound; the convention the worked example quotes)
struct LogSectorConstants {
  SectorPair composed;
  SectorPair swapped;
  bool disagree = false;
};

LogSectorConstants sector_constants_log(double lambda, double alpha);

/// Countable nonnegative scale grid Q = {0, q1, q2, ...}. Zero is implicit.
class ScaleSet {
 public:
  enum class Kind { kUniform, kLogarithmic, kExplicit };

  /// {k lambda : k >= 0}, lambda > 0.
  static ScaleSet uniform(double lambda);
  /// {0} u {lambda^k : k in Z}, lambda > 1. `min_exponent` bounds the
  /// enumeration used by brute-force oracles; quantization is unbounded.
  static ScaleSet logarithmic(double lambda, int min_exponent = -400);
  /// Sorted, strictly increasing, all positive.
  static ScaleSet explicit_list(std::vector<double> scales);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  int min_exponent() const { return min_exponent_; }
  const std::vector<double>& scales() const { return scales_; }

  /// Smallest positive scale. For the logarithmic kind this is the
  /// enumeration floor lambda^min_exponent.
  double q1() const;

  /// Every positive scale <= radius, plus the first scale beyond it.
  std::vector<double> enumerate(double radius) const;

  bool operator==(const ScaleSet&) const = default;

 private:
  ScaleSet() = default;
  Kind kind_ = Kind::kUniform;
  double lambda_ = 1.0;
  int min_exponent_ = 0;
  std::vector<double> scales_;
};

std::string to_string(ScaleSet::Kind k);

struct ExtendedActionSet {
  ActionSet base;
  ScaleSet scales;
};

/// All members q*u with q from ScaleSet::enumerate(radius), plus 0 first.
std::vector<Eigen::VectorXd> enumerate_truncated(const ExtendedActionSet& ext,
                                                 double radius);

}  // namespace naclab

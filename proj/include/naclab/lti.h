#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "naclab/action_set.h"

namespace naclab {

/// Square-output LTI plant  x' = A x + B u,  y = C x  with u, y in R^m.
class LtiSystem {
 public:
  /// Throws PreconditionError unless A is n x n, B is n x m, C is m x n.
  LtiSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c);

  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::MatrixXd& B() const { return b_; }
  const Eigen::MatrixXd& C() const { return c_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }

  bool operator==(const LtiSystem& o) const {
    return a_ == o.a_ && b_ == o.b_ && c_ == o.c_;
  }

 private:
  Eigen::MatrixXd a_, b_, c_;
};

struct StructuralReport {
  bool controllable = false;
  bool observable = false;
  bool stabilizable = false;
  bool detectable = false;
  int controllability_rank = 0;
  int observability_rank = 0;
  bool minimal() const { return controllable && observable; }
};

/// Kalman rank tests with singular-value tolerance 1e-9 relative to the
/// largest singular value; PBH tests on the closed right half-plane
/// eigenvalues for stabilizability/detectability.
StructuralReport check_structural(const LtiSystem& sys);

/// G(s) = C (sI - A)^{-1} B via an LU solve. Throws NumericalError when s is
/// numerically an eigenvalue of A.
Eigen::MatrixXcd eval_transfer(const LtiSystem& sys, std::complex<double> s);

enum class Verdict { kPass, kFail, kInconclusive };
std::string to_string(Verdict v);

struct SprOptions {
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int points = 400;
  double margin = 1e-9;
  bool include_dc = true;  // also evaluate at omega = 0
};

/// Checks that G (I + k1 G)^{-1} is stable and that
/// H2 = (I + k2 G)(I + k1 G)^{-1} has positive definite Hermitian part on the
/// imaginary axis (frequency sweep) and at infinity.
struct SprReport {
  double k1 = 0.0;
  double k2 = 0.0;
  bool stable_transformed = false;
  double transformed_spectral_abscissa = 0.0;  // max Re eig(A - k1 B C)
  double min_hermitian_eig = 0.0;
  double argmin_omega = 0.0;
  std::vector<double> grid;
  bool asymptotic_ok = false;
  Verdict verdict = Verdict::kInconclusive;
  std::string diagnostic;
};

std::vector<double> default_frequency_grid(const SprOptions& opts);
SprReport check_spr(const LtiSystem& sys, double k1, double k2,
                    const SprOptions& opts = {});

struct QuadratureOptions {
  int initial_intervals = 16;
  int max_intervals = 1 << 22;
  double rel_tol = 1e-8;
};

struct GramianResult {
  Eigen::MatrixXd W;
  int intervals = 0;           // Simpson intervals of the accepted estimate
  double last_rel_change = 0;  // between the last two halvings
};

/// W_tau = int_0^tau e^{A^T s} C^T C e^{A s} ds by composite Simpson with
/// step halving; the accepted value carries one Richardson correction.
GramianResult gramian(const LtiSystem& sys, double tau,
                      const QuadratureOptions& opts = {});

/// int_0^tau || e^{A^T s} C^T ||_2 ds with the same quadrature scheme.
double output_kernel_integral(const LtiSystem& sys, double tau,
                              const QuadratureOptions& opts = {});

enum class ObservabilityHandling {
  kRequire,              // singular W_tau is an error
  kRestrictToObservable  // invert W_tau on the observable subspace only
};

struct TauSample {
  double tau = 0.0;
  double w_min_eig = 0.0;
  double w_condition = 0.0;
  double w_inv_norm = 0.0;
  double kernel_integral = 0.0;
  double gamma_unit = 0.0;  // gamma(1; tau)
};

struct GramianBound {
  double tau = 0.0;  // grid point attaining c2
  Eigen::MatrixXd W;
  double gamma_of_delta = 0.0;
  double c2 = 0.0;             // min over the tau grid of gamma(1; tau)
  double c2_sup_over_grid = 0.0;
  std::vector<TauSample> profile;
  bool restricted = false;
  int observable_dim = 0;
};

/// gamma(delta; tau) = delta ||W_tau^{-1}|| int_0^tau ||e^{A^T s} C^T|| ds on
/// each tau of the grid. Throws NumericalError when W_tau is numerically
/// singular and handling is kRequire.
GramianBound gamma_and_c2(const LtiSystem& sys, double delta,
                          const std::vector<double>& tau_grid,
                          ObservabilityHandling handling = ObservabilityHandling::kRequire,
                          const QuadratureOptions& opts = {});

/// Orthonormal basis (columns) of the observable subspace range(O^T).
Eigen::MatrixXd observable_basis(const LtiSystem& sys);

enum class CertificateKind {
  kGenericPractical,      // generic grid, omega = c2 delta q1
  kUniformPractical,      // uniform grid, omega = c2 delta lambda
  kLogarithmicExponential // logarithmic grid, omega = 0
};
std::string to_string(CertificateKind k);

struct IssCertificate {
  CertificateKind kind = CertificateKind::kUniformPractical;
  double k1 = 0.0;
  double k2 = 0.0;
  double omega = 0.0;
  double c2 = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double scale = 0.0;  // q1 or lambda entering omega
  SprReport spr;
  GramianBound gram;
  std::vector<std::string> notes;
};

/// Thrown when a hypothesis of the certificate does not hold.
class CertificateRefused : public std::runtime_error {
 public:
  CertificateRefused(std::string hypothesis, const std::string& detail)
      : std::runtime_error("certificate refused: " + hypothesis + " hypothesis fails: " + detail),
        hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  std::string hypothesis_;
};

IssCertificate assemble_certificate(CertificateKind kind, const LtiSystem& sys,
                                    const GeometryCertificate& geometry,
                                    const ScaleSet& scales, const SprReport& spr,
                                    const GramianBound& gram);

}  // namespace naclab

#include "naclab/lti.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "naclab/errors.h"
#include "naclab/kernels.h"
#include "naclab/quantizers.h"

namespace naclab {

namespace {

constexpr double kRankTol = 1e-9;
constexpr double kHurwitzTol = 1e-9;
constexpr double kSingularTol = 1e-10;
constexpr double kGramianCondLimit = 1e12;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

template <typename Matrix>
int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  const auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * top) ++r;
  return r;
}

Eigen::MatrixXd controllability_matrix(const LtiSystem& sys) {
  const int n = sys.n(), m = sys.m();
  Eigen::MatrixXd k(n, n * m);
  Eigen::MatrixXd block = sys.B();
  for (int i = 0; i < n; ++i) {
    k.middleCols(i * m, m) = block;
    block = sys.A() * block;
  }
  return k;
}

Eigen::MatrixXd observability_matrix(const LtiSystem& sys) {
  const int n = sys.n(), m = sys.m();
  Eigen::MatrixXd o(n * m, n);
  Eigen::MatrixXd block = sys.C();
  for (int i = 0; i < n; ++i) {
    o.middleRows(i * m, m) = block;
    block = block * sys.A();
  }
  return o;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Composite Simpson over [0, tau] of f(C e^{A s}) on N intervals, with
// e^{A s} advanced by repeated multiplication with e^{A h}.
template <typename T, typename F>
T simpson(const LtiSystem& sys, double tau, int intervals, F&& f) {
  const double h = tau / intervals;
  const Eigen::MatrixXd step = (sys.A() * h).exp();
  Eigen::MatrixXd p = sys.C();
  T sum = f(p);
  for (int k = 1; k < intervals; ++k) {
    p = p * step;
    sum += (k % 2 == 1 ? 4.0 : 2.0) * f(p);
  }
  p = p * step;
  sum += f(p);
  return sum * (h / 3.0);
}

struct FrequencyIssue {
  double omega;
  std::string text;
};

struct Halving {
  int intervals = 0;
  double rel_change = 0.0;
};

template <typename T, typename F, typename Norm>
T simpson_halving(const LtiSystem& sys, double tau, const QuadratureOptions& opts,
                  F&& f, Norm&& norm, Halving* info) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw PreconditionError("quadrature horizon must be positive and finite");
  int n = std::max(2, opts.initial_intervals + opts.initial_intervals % 2);
  T coarse = simpson<T>(sys, tau, n, f);
  while (true) {
    const int fine_n = 2 * n;
    if (fine_n > opts.max_intervals)
      throw NumericalError("quadrature did not reach relative tolerance " +
                           fmt(opts.rel_tol) + " within " +
                           std::to_string(opts.max_intervals) + " intervals");
    T fine = simpson<T>(sys, tau, fine_n, f);
    const double scale = norm(fine);
    const double change = norm(T(fine - coarse));
    const double rel = scale > 0.0 ? change / scale : change;
    if (rel <= opts.rel_tol) {
      info->intervals = fine_n;
      info->rel_change = rel;
      return T(fine + (fine - coarse) / 15.0);
    }
    coarse = fine;
    n = fine_n;
  }
}

}  // namespace

LtiSystem::LtiSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols())
    throw PreconditionError("A must be a non-empty square matrix");
  if (b_.rows() != a_.rows() || b_.cols() == 0)
    throw PreconditionError("B must have n rows and at least one column");
  if (c_.cols() != a_.rows() || c_.rows() != b_.cols())
    throw PreconditionError("C must be m x n where B is n x m (square output)");
  if (!all_finite(a_) || !all_finite(b_) || !all_finite(c_))
    throw PreconditionError("system matrices must be finite");
}

StructuralReport check_structural(const LtiSystem& sys) {
  const int n = sys.n();
  StructuralReport r;
  r.controllability_rank = numerical_rank(controllability_matrix(sys));
  r.observability_rank = numerical_rank(observability_matrix(sys));
  r.controllable = r.controllability_rank == n;
  r.observable = r.observability_rank == n;
  r.stabilizable = true;
  r.detectable = true;
  const Eigen::VectorXcd eig = sys.A().eigenvalues();
  const Eigen::MatrixXcd a = sys.A().cast<std::complex<double>>();
  for (int i = 0; i < eig.size(); ++i) {
    if (eig(i).real() < -kHurwitzTol) continue;
    const Eigen::MatrixXcd shifted = a - eig(i) * Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd pb(n, n + sys.m());
    pb << shifted, sys.B().cast<std::complex<double>>();
    Eigen::MatrixXcd pc(n + sys.m(), n);
    pc << shifted, sys.C().cast<std::complex<double>>();
    if (numerical_rank(pb) < n) r.stabilizable = false;
    if (numerical_rank(pc) < n) r.detectable = false;
  }
  return r;
}

Eigen::MatrixXcd eval_transfer(const LtiSystem& sys, std::complex<double> s) {
  const int n = sys.n();
  const Eigen::MatrixXcd m =
      s * Eigen::MatrixXcd::Identity(n, n) - sys.A().cast<std::complex<double>>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  if (!(lu.rcond() > 1e-14))
    throw NumericalError("s = (" + fmt(s.real()) + ", " + fmt(s.imag()) +
                         ") is numerically a pole (rcond " + fmt(lu.rcond()) + ")");
  return sys.C().cast<std::complex<double>>() * lu.solve(sys.B().cast<std::complex<double>>());
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::vector<double> default_frequency_grid(const SprOptions& opts) {
  std::vector<double> grid = log_spaced(opts.omega_min, opts.omega_max,
                                        static_cast<std::size_t>(opts.points));
  if (opts.include_dc) grid.insert(grid.begin(), 0.0);
  return grid;
}

SprReport check_spr(const LtiSystem& sys, double k1, double k2, const SprOptions& opts) {
  if (!(k1 <= k2)) throw PreconditionError("check_spr needs k1 <= k2");
  if (!(opts.margin >= 0.0)) throw PreconditionError("SPR margin must be nonnegative");
  SprReport r;
  r.k1 = k1;
  r.k2 = k2;
  r.grid = default_frequency_grid(opts);

  const Eigen::MatrixXd a_cl = sys.A() - k1 * sys.B() * sys.C();
  r.transformed_spectral_abscissa = a_cl.eigenvalues().real().maxCoeff();
  r.stable_transformed = r.transformed_spectral_abscissa < -kHurwitzTol;

  const auto samples = kernels::spr_sweep(sys, k1, k2, r.grid, kernels::Backend::kOpenMP);
  r.min_hermitian_eig = std::numeric_limits<double>::infinity();
  const FrequencyIssue none{-1.0, ""};
  FrequencyIssue fail_issue = none, open_issue = none;
  for (const auto& f : samples) {
    if (f.pole) {
      if (open_issue.omega < 0.0)
        open_issue = {f.omega, "G has a pole at omega = " + fmt(f.omega)};
      continue;
    }
    if (f.sigma_min_left < kSingularTol && open_issue.omega < 0.0)
      open_issue = {f.omega, "I + k1 G is singular at omega = " + fmt(f.omega)};
    if (f.sigma_min_right < kSingularTol && fail_issue.omega < 0.0)
      fail_issue = {f.omega, "I + k2 G is singular at omega = " + fmt(f.omega) +
                                 " (imaginary-axis zero of H2)"};
    if (f.min_hermitian_eig < r.min_hermitian_eig) {
      r.min_hermitian_eig = f.min_hermitian_eig;
      r.argmin_omega = f.omega;
    }
  }

  // H2 -> I as |s| -> inf because G is strictly proper; confirm numerically
  // well above the plant's bandwidth.
  const double rho = sys.A().eigenvalues().cwiseAbs().maxCoeff();
  const double far = 1e6 * std::max({1.0, rho, opts.omega_max});
  const auto tail = kernels::spr_sweep(sys, k1, k2, std::vector<double>{far},
                                       kernels::Backend::kSerial);
  r.asymptotic_ok = !tail[0].pole && tail[0].min_hermitian_eig > opts.margin;

  if (!r.stable_transformed) {
    r.verdict = Verdict::kFail;
    r.diagnostic = "A - k1 B C is not Hurwitz (spectral abscissa " +
                   fmt(r.transformed_spectral_abscissa) + ")";
  } else if (fail_issue.omega >= 0.0) {
    r.verdict = Verdict::kFail;
    r.diagnostic = fail_issue.text;
  } else if (r.min_hermitian_eig < -opts.margin) {
    r.verdict = Verdict::kFail;
    r.diagnostic = "Hermitian part of H2 is indefinite at omega = " + fmt(r.argmin_omega) +
                   " (min eigenvalue " + fmt(r.min_hermitian_eig) + ")";
  } else if (open_issue.omega >= 0.0) {
    r.verdict = Verdict::kInconclusive;
    r.diagnostic = open_issue.text;
  } else if (r.min_hermitian_eig <= opts.margin) {
    r.verdict = Verdict::kInconclusive;
    r.diagnostic = "min Hermitian eigenvalue " + fmt(r.min_hermitian_eig) +
                   " is within the margin " + fmt(opts.margin) + " of zero";
  } else if (!r.asymptotic_ok) {
    r.verdict = Verdict::kInconclusive;
    r.diagnostic = "high-frequency limit of H2 is not numerically positive";
  } else {
    r.verdict = Verdict::kPass;
  }
  return r;
}

GramianResult gramian(const LtiSystem& sys, double tau, const QuadratureOptions& opts) {
  Halving info;
  Eigen::MatrixXd w = simpson_halving<Eigen::MatrixXd>(
      sys, tau, opts, [](const Eigen::MatrixXd& p) -> Eigen::MatrixXd { return p.transpose() * p; },
      [](const Eigen::MatrixXd& m) { return m.norm(); }, &info);
  GramianResult r;
  r.W = 0.5 * (w + w.transpose());
  r.intervals = info.intervals;
  r.last_rel_change = info.rel_change;
  return r;
}

double output_kernel_integral(const LtiSystem& sys, double tau, const QuadratureOptions& opts) {
  Halving info;
  return simpson_halving<double>(
      sys, tau, opts,
      [](const Eigen::MatrixXd& p) {
        return Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues()(0);
      },
      [](double v) { return std::abs(v); }, &info);
}

Eigen::MatrixXd observable_basis(const LtiSystem& sys) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(observability_matrix(sys), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(0) > 0.0 && sv(i) > kRankTol * sv(0)) ++r;
  return svd.matrixV().leftCols(r);
}

GramianBound gamma_and_c2(const LtiSystem& sys, double delta,
                          const std::vector<double>& tau_grid,
                          ObservabilityHandling handling, const QuadratureOptions& opts) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw PreconditionError("delta must be finite and nonnegative");
  if (tau_grid.empty()) throw PreconditionError("tau grid is empty");
  for (double t : tau_grid)
    if (!(t > 0.0)) throw PreconditionError("every tau must be positive");

  GramianBound g;
  g.observable_dim = sys.n();
  Eigen::MatrixXd basis;
  if (handling == ObservabilityHandling::kRestrictToObservable) {
    basis = observable_basis(sys);
    g.observable_dim = static_cast<int>(basis.cols());
    if (g.observable_dim == 0) throw NumericalError("no observable subspace (C e^{At} = 0)");
    g.restricted = g.observable_dim < sys.n();
    if (g.restricted && !check_structural(sys).detectable)
      throw NumericalError("unobservable subspace contains an unstable mode; "
                           "restricting the Gramian would hide it");
  }

  std::vector<Eigen::MatrixXd> ws;
  for (double tau : tau_grid) {
    const GramianResult gr = gramian(sys, tau, opts);
    const Eigen::MatrixXd w = g.restricted ? Eigen::MatrixXd(basis.transpose() * gr.W * basis) : gr.W;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w).eigenvalues();
    TauSample s;
    s.tau = tau;
    s.w_min_eig = ev.minCoeff();
    s.w_condition = s.w_min_eig > 0.0 ? ev.maxCoeff() / s.w_min_eig
                                      : std::numeric_limits<double>::infinity();
    if (!(s.w_min_eig > 0.0) || s.w_condition > kGramianCondLimit)
      throw NumericalError("observability Gramian at tau = " + fmt(tau) +
                           " is numerically singular (condition " + fmt(s.w_condition) +
                           ", min eigenvalue " + fmt(s.w_min_eig) + ")");
    s.w_inv_norm = 1.0 / s.w_min_eig;
    s.kernel_integral = output_kernel_integral(sys, tau, opts);
    s.gamma_unit = s.w_inv_norm * s.kernel_integral;
    g.profile.push_back(s);
    ws.push_back(gr.W);
  }

  std::size_t best = 0;
  g.c2_sup_over_grid = 0.0;
  for (std::size_t i = 0; i < g.profile.size(); ++i) {
    if (g.profile[i].gamma_unit < g.profile[best].gamma_unit) best = i;
    g.c2_sup_over_grid = std::max(g.c2_sup_over_grid, g.profile[i].gamma_unit);
  }
  g.tau = g.profile[best].tau;
  g.W = ws[best];
  g.c2 = g.profile[best].gamma_unit;
  g.gamma_of_delta = delta * g.c2;
  return g;
}

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::kGenericPractical: return "generic-practical";
    case CertificateKind::kUniformPractical: return "uniform-practical";
    case CertificateKind::kLogarithmicExponential: return "logarithmic-exponential";
  }
  return "generic-practical";
}

IssCertificate assemble_certificate(CertificateKind kind, const LtiSystem& sys,
                                    const GeometryCertificate& geometry,
                                    const ScaleSet& scales, const SprReport& spr,
                                    const GramianBound& gram) {
  if (!geometry.a2_holds)
    throw CertificateRefused("geometry", "0 is not interior to the convex hull of the directions");
  if (!(geometry.alpha > 0.0))
    throw CertificateRefused("geometry", "covering constant alpha = " + fmt(geometry.alpha) +
                                             " is not positive");
  if (spr.verdict != Verdict::kPass)
    throw CertificateRefused("spr", "loop-transformed plant is not certified strictly positive "
                                    "real (" + to_string(spr.verdict) + ": " + spr.diagnostic + ")");
  const bool kind_ok =
      (kind == CertificateKind::kUniformPractical && scales.kind() == ScaleSet::Kind::kUniform) ||
      (kind == CertificateKind::kLogarithmicExponential &&
       scales.kind() == ScaleSet::Kind::kLogarithmic) ||
      kind == CertificateKind::kGenericPractical;
  if (!kind_ok)
    throw CertificateRefused("scale-kind", to_string(kind) + " certificate cannot use a " +
                                               to_string(scales.kind()) + " scale set");
  if (!(gram.c2 > 0.0) || !std::isfinite(gram.c2))
    throw CertificateRefused("gramian", "c2 = " + fmt(gram.c2) + " is not finite and positive");

  IssCertificate c;
  c.kind = kind;
  c.k1 = spr.k1;
  c.k2 = spr.k2;
  c.c2 = gram.c2;
  c.delta = geometry.delta;
  c.alpha = geometry.alpha;
  c.spr = spr;
  c.gram = gram;
  switch (kind) {
    case CertificateKind::kGenericPractical:
      c.scale = scales.q1();
      c.omega = c.c2 * c.delta * c.scale;
      break;
    case CertificateKind::kUniformPractical:
      c.scale = scales.lambda();
      c.omega = c.c2 * c.delta * c.scale;
      break;
    case CertificateKind::kLogarithmicExponential:
      c.scale = scales.lambda();
      c.omega = 0.0;
      break;
  }
  if (gram.restricted)
    c.notes.push_back("Gramian inverted on the " + std::to_string(gram.observable_dim) +
                      "-dimensional observable subspace of the " + std::to_string(sys.n()) +
                      "-dimensional state; unobservable modes are stable");
  if (geometry.delta_lower_bound)
    c.notes.push_back("delta is a Monte Carlo lower bound");
  if (geometry.alpha_estimate) c.notes.push_back("alpha is a numerical estimate");
  c.notes.push_back("c2 is the minimum over the tau grid; the supremum over the grid is " +
                    fmt(gram.c2_sup_over_grid));
  return c;
}

}  // namespace naclab

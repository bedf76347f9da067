#include "naclab/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "naclab/errors.h"
#include "naclab/nac.h"
#include "naclab/quantizers.h"

namespace naclab {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kDivergenceNorm = 1e150;
constexpr int kChatteringHolds = 1000;

bool is_integer_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

}  // namespace

Eigen::VectorXd DisturbanceTable::at(double t, int m) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return Eigen::VectorXd::Zero(m);
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double DisturbanceTable::sup_norm() const {
  double s = 0.0;
  for (const auto& v : values) s = std::max(s, v.norm());
  return s;
}

std::string to_string(QuantizerKind k) {
  switch (k) {
    case QuantizerKind::kUniform: return "uniform";
    case QuantizerKind::kLogarithmicSymmetric: return "logarithmic-symmetric";
    case QuantizerKind::kMinimal: return "minimal";
    case QuantizerKind::kExplicit: return "explicit";
  }
  return "explicit";
}

void Scenario::validate() const {
  const int n = system.n(), m = system.m();
  if (actions.base.dim() != m)
    throw PreconditionError("action dimension " + std::to_string(actions.base.dim()) +
                            " differs from the system input dimension " + std::to_string(m));
  if (x0.size() != n)
    throw PreconditionError("x0 has " + std::to_string(x0.size()) + " entries, n = " +
                            std::to_string(n));
  if (!x0.allFinite()) throw PreconditionError("x0 must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("dt must be positive");
  if (!(hold >= dt * (1.0 - 1e-12))) throw PreconditionError("hold must be >= dt");
  if (!is_integer_multiple(hold, dt)) throw PreconditionError("hold must be a multiple of dt");
  if (!(t_end >= hold * (1.0 - 1e-12)) || !std::isfinite(t_end))
    throw PreconditionError("t_end must be >= hold");
  if (disturbance.times.size() != disturbance.values.size())
    throw PreconditionError("disturbance table is ragged");
  for (std::size_t i = 0; i < disturbance.times.size(); ++i) {
    if (disturbance.values[i].size() != m)
      throw PreconditionError("disturbance row has the wrong dimension");
    if (i > 0 && !(disturbance.times[i] > disturbance.times[i - 1]))
      throw PreconditionError("disturbance times must be strictly increasing");
  }
}

int Scenario::hold_steps() const { return static_cast<int>(std::lround(hold / dt)); }

long Scenario::total_steps() const { return std::lround(t_end / dt); }

Trajectory simulate(const Scenario& sc) {
  sc.validate();
  const Eigen::MatrixXd& a = sc.system.A();
  const Eigen::MatrixXd& b = sc.system.B();
  const Eigen::MatrixXd& c = sc.system.C();
  const int m = sc.system.m();
  const ScalarQuantizer quant = natural_quantizer(sc.actions.scales);
  const long steps = sc.total_steps();
  const int hold_steps = sc.hold_steps();
  const double h = sc.dt;

  Trajectory tr;
  const auto reserve = static_cast<std::size_t>(steps + 1);
  tr.times.reserve(reserve);
  tr.states.reserve(reserve);
  tr.outputs.reserve(reserve);
  tr.actions.reserve(reserve);
  tr.disturbances.reserve(reserve);

  Eigen::VectorXd x = sc.x0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd previous_u;
  int alternations = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Eigen::VectorXd y = c * x;
    if (k % hold_steps == 0) {
      const Eigen::VectorXd next = phi_ext(sc.actions, quant, -y);
      if (k > 0 && next != u) {
        alternations = (previous_u.size() == m && next == previous_u) ? alternations + 1 : 1;
        previous_u = u;
      } else if (k > 0) {
        alternations = 0;
      }
      if (alternations > kChatteringHolds) tr.chattering = true;
      u = next;
    }
    const Eigen::VectorXd d = sc.disturbance.at(t, m);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.outputs.push_back(y);
    tr.actions.push_back(u);
    tr.disturbances.push_back(d);
    if (k == steps) break;

    const Eigen::VectorXd drive = b * (u + d);
    const Eigen::VectorXd k1 = a * x + drive;
    const Eigen::VectorXd k2 = a * (x + 0.5 * h * k1) + drive;
    const Eigen::VectorXd k3 = a * (x + 0.5 * h * k2) + drive;
    const Eigen::VectorXd k4 = a * (x + h * k3) + drive;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      tr.diverged = true;
      std::ostringstream os;
      os << "state diverged after t = " << t << "; trajectory truncated";
      tr.diagnostic = os.str();
      break;
    }
  }
  if (tr.chattering && tr.diagnostic.empty())
    tr.diagnostic = "action alternated between two values for more than " +
                    std::to_string(kChatteringHolds) + " consecutive holds";
  return tr;
}

std::vector<Trajectory> simulate_batch(std::span<const Scenario> scenarios,
                                       kernels::Backend backend) {
  std::vector<Trajectory> out(scenarios.size());
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  if (backend == kernels::Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = simulate(scenarios[i]);
    return out;
  }
  std::vector<std::string> errors(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = simulate(scenarios[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw PreconditionError("scenario '" + scenarios[i].name + "': " + errors[i]);
  return out;
}

std::optional<double> time_to_ball(const Trajectory& tr, double radius) {
  if (tr.size() == 0) return std::nullopt;
  std::size_t first = tr.size();
  for (std::size_t i = tr.size(); i-- > 0;) {
    if (!(tr.states[i].norm() <= radius)) break;
    first = i;
  }
  if (first == tr.size()) return std::nullopt;
  return tr.times[first];
}

StabilityMetrics metrics(const Trajectory& tr, double omega, double ball_radius) {
  if (tr.size() == 0) throw PreconditionError("metrics need a non-empty trajectory");
  if (!(omega >= 0.0)) throw PreconditionError("omega must be nonnegative");
  StabilityMetrics s;
  const std::size_t n = tr.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = tr.states[i].norm();
  s.x0_norm = norms.front();
  s.final_norm = norms.back();
  s.omega = omega;

  const double t0 = tr.times.front(), t1 = tr.times.back();
  const double tail_start = t1 - 0.2 * (t1 - t0);
  for (std::size_t i = 0; i < n; ++i)
    if (tr.times[i] >= tail_start) s.terminal_radius = std::max(s.terminal_radius, norms[i]);

  s.ball_radius = ball_radius > 0.0 ? ball_radius : (omega > 0.0 ? omega : 1e-3 * s.x0_norm);
  s.time_to_ball = time_to_ball(tr, s.ball_radius);

  const double noise = std::max(kLogFloor, 1e-9 * s.x0_norm);
  std::size_t end = 0;
  while (end < n && norms[end] - omega > noise) ++end;
  if (end < 10 || !(s.x0_norm > 0.0)) return s;

  // Least-squares line through (t, log e(t)).
  double st = 0, sl = 0, stt = 0, stl = 0;
  std::vector<double> logs(end);
  for (std::size_t i = 0; i < end; ++i) {
    logs[i] = std::log(std::max(norms[i] - omega, kLogFloor));
    st += tr.times[i];
    sl += logs[i];
    stt += tr.times[i] * tr.times[i];
    stl += tr.times[i] * logs[i];
  }
  const double cnt = static_cast<double>(end);
  const double denom = cnt * stt - st * st;
  if (!(denom > 0.0)) return s;
  const double slope = (cnt * stl - st * sl) / denom;
  const double intercept = (sl - slope * st) / cnt;
  s.fit_available = true;
  s.fit_samples = end;
  s.fit_start = tr.times.front();
  s.fit_end = tr.times[end - 1];
  s.eps_hat = -slope;
  s.c1_fit = std::exp(intercept) / s.x0_norm;
  double envelope = 0.0;
  for (std::size_t i = 0; i < end; ++i)
    envelope = std::max(envelope, std::exp(logs[i] + s.eps_hat * tr.times[i]));
  s.c1_hat = envelope / s.x0_norm;

  s.envelope_ok = s.eps_hat > 0.0;
  for (std::size_t i = 0; i < n && s.envelope_ok; ++i) {
    const double bound = s.c1_hat * std::exp(-s.eps_hat * tr.times[i]) * s.x0_norm + omega;
    if (norms[i] > bound * (1.0 + 1e-12) + noise) s.envelope_ok = false;
  }
  return s;
}

RunComparison compare_runs(const Scenario& baseline, const Scenario& extended,
                           double omega_baseline, double omega_extended) {
  if (!(baseline.system == extended.system))
    throw PreconditionError("compared scenarios use different systems");
  if (baseline.x0 != extended.x0) throw PreconditionError("compared scenarios use different x0");
  if (baseline.t_end != extended.t_end || baseline.dt != extended.dt)
    throw PreconditionError("compared scenarios use different horizons or steps");
  const std::vector<Scenario> both{baseline, extended};
  auto runs = simulate_batch(both);
  RunComparison r;
  r.baseline = std::move(runs[0]);
  r.extended = std::move(runs[1]);
  r.baseline_metrics = metrics(r.baseline, omega_baseline);
  r.extended_metrics = metrics(r.extended, omega_extended);
  r.extended_smaller = r.extended_metrics.terminal_radius < r.baseline_metrics.terminal_radius;
  r.radius_ratio = r.extended_metrics.terminal_radius > 0.0
                       ? r.baseline_metrics.terminal_radius / r.extended_metrics.terminal_radius
                       : std::numeric_limits<double>::infinity();
  return r;
}

namespace {

void put(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += ',';
  line += buf;
}

}  // namespace

void write_csv(std::ostream& os, const Trajectory& tr) {
  const int n = tr.size() ? static_cast<int>(tr.states[0].size()) : 0;
  const int m = tr.size() ? static_cast<int>(tr.outputs[0].size()) : 0;
  std::string line = "t";
  for (const char* p : {"x", "y", "u", "d"}) {
    const int count = p[0] == 'x' ? n : m;
    for (int i = 1; i <= count; ++i) line += "," + std::string(p) + std::to_string(i);
  }
  os << line << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", tr.times[k]);
    line = buf;
    for (const auto* v : {&tr.states[k], &tr.outputs[k], &tr.actions[k], &tr.disturbances[k]})
      for (int i = 0; i < v->size(); ++i) put(line, (*v)(i));
    os << line << '\n';
  }
}

Trajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "header", "empty CSV");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  if (cols.empty() || cols[0] != "t") throw ParseError(1, "header", "first column must be t");
  int counts[4] = {0, 0, 0, 0};
  const std::string prefixes = "xyud";
  int stage = 0;
  for (std::size_t i = 1; i < cols.size(); ++i) {
    const auto pos = cols[i].empty() ? std::string::npos : prefixes.find(cols[i][0]);
    if (pos == std::string::npos || static_cast<int>(pos) < stage)
      throw ParseError(1, cols[i], "unexpected column");
    stage = static_cast<int>(pos);
    ++counts[stage];
    if (cols[i] != std::string(1, prefixes[stage]) + std::to_string(counts[stage]))
      throw ParseError(1, cols[i], "columns out of order");
  }
  if (counts[1] != counts[2] || counts[1] != counts[3])
    throw ParseError(1, "header", "y, u and d column counts differ");

  Trajectory tr;
  const std::size_t width = cols.size();
  int lineno = 1;
  std::vector<double> row(width);
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* p = line.c_str();
    for (std::size_t i = 0; i < width; ++i) {
      char* endp = nullptr;
      row[i] = std::strtod(p, &endp);
      if (endp == p) throw ParseError(lineno, cols[i], "not a number");
      p = endp;
      if (i + 1 < width) {
        if (*p != ',') throw ParseError(lineno, cols[i], "expected ','");
        ++p;
      }
    }
    if (*p != '\0') throw ParseError(lineno, "row", "too many fields");
    std::size_t at = 0;
    tr.times.push_back(row[at++]);
    auto take = [&](int count) {
      Eigen::VectorXd v(count);
      for (int i = 0; i < count; ++i) v(i) = row[at++];
      return v;
    };
    tr.states.push_back(take(counts[0]));
    tr.outputs.push_back(take(counts[1]));
    tr.actions.push_back(take(counts[2]));
    tr.disturbances.push_back(take(counts[3]));
  }
  return tr;
}

}  // namespace naclab

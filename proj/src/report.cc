#include "naclab/report.h"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace naclab {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void KeyValueReport::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}
void KeyValueReport::add(const std::string& key, double value) { add(key, format_number(value)); }
void KeyValueReport::add(const std::string& key, int value) { add(key, std::to_string(value)); }
void KeyValueReport::add(const std::string& key, std::size_t value) {
  add(key, std::to_string(value));
}
void KeyValueReport::add(const std::string& key, bool value) {
  add(key, std::string(value ? "true" : "false"));
}

const std::string& KeyValueReport::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw std::out_of_range("report has no key '" + key + "'");
}

std::string KeyValueReport::str() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + ": " + v + "\n";
  return s;
}

namespace {

void append_spr(KeyValueReport& r, const SprCase& c) {
  const std::string p = "spr." + c.label + ".";
  r.add(p + "k1", c.pair.k1);
  r.add(p + "k2", c.pair.k2);
  r.add(p + "verdict", to_string(c.report.verdict));
  r.add(p + "stable_transformed", c.report.stable_transformed);
  r.add(p + "transformed_spectral_abscissa", c.report.transformed_spectral_abscissa);
  r.add(p + "min_hermitian_eig", c.report.min_hermitian_eig);
  r.add(p + "argmin_omega", c.report.argmin_omega);
  r.add(p + "grid_points", c.report.grid.size());
  r.add(p + "asymptotic_ok", c.report.asymptotic_ok);
  if (!c.report.diagnostic.empty()) r.add(p + "diagnostic", c.report.diagnostic);
}

}  // namespace

void append_validation(KeyValueReport& r, const ValidationResult& v) {
  r.add("structural.controllable", v.structural.controllable);
  r.add("structural.observable", v.structural.observable);
  r.add("structural.controllability_rank", v.structural.controllability_rank);
  r.add("structural.observability_rank", v.structural.observability_rank);
  r.add("structural.stabilizable", v.structural.stabilizable);
  r.add("structural.detectable", v.structural.detectable);
  r.add("geometry.a2_holds", v.geometry.a2_holds);
  r.add("geometry.delta", v.geometry.delta);
  r.add("geometry.alpha", v.geometry.alpha);
  r.add("geometry.method", to_string(v.geometry.method));
  r.add("geometry.delta_lower_bound", v.geometry.delta_lower_bound);
  r.add("geometry.alpha_estimate", v.geometry.alpha_estimate);
  if (!v.geometry.reason.empty()) r.add("geometry.reason", v.geometry.reason);
  if (v.quantizer_sector) {
    const SectorCheckReport& q = *v.quantizer_sector;
    r.add("quantizer_sector.pass", q.pass);
    r.add("quantizer_sector.samples", q.samples);
    r.add("quantizer_sector.violations", q.violations);
    r.add("quantizer_sector.lower_coeff", q.lower_coeff);
    r.add("quantizer_sector.upper_coeff", q.upper_coeff);
    r.add("quantizer_sector.worst_lower_margin", q.worst_lower_margin);
    r.add("quantizer_sector.worst_upper_margin", q.worst_upper_margin);
  } else {
    r.add("quantizer_sector.pass", "not-applicable");
  }
  r.add("validation.ok", v.ok());
  for (std::size_t i = 0; i < v.failures.size(); ++i)
    r.add("validation.failure." + std::to_string(i + 1), v.failures[i]);
}

void append_analysis(KeyValueReport& r, const AnalysisResult& a) {
  append_validation(r, a.validation);
  if (a.uniform) {
    r.add("sector.uniform.k1", a.uniform->pair.k1);
    r.add("sector.uniform.k2", a.uniform->pair.k2);
    r.add("sector.uniform.degenerate", a.uniform->degenerate);
  }
  if (a.log) {
    r.add("sector.log.swapped.k1", a.log->swapped.k1);
    r.add("sector.log.swapped.k2", a.log->swapped.k2);
    r.add("sector.log.composed.k1", a.log->composed.k1);
    r.add("sector.log.composed.k2", a.log->composed.k2);
    r.add("sector.log.conventions_disagree", a.log->disagree);
  }
  if (a.empirical) {
    r.add("sector.empirical.k1", a.empirical->k1);
    r.add("sector.empirical.k2", a.empirical->k2);
    r.add("sector.empirical.samples", a.empirical->samples);
  }
  for (const auto& c : a.spr) append_spr(r, c);
  if (a.empirical_spr) append_spr(r, *a.empirical_spr);
  if (a.gram) {
    const GramianBound& g = *a.gram;
    r.add("gramian.restricted_to_observable", g.restricted);
    r.add("gramian.observable_dim", g.observable_dim);
    for (const auto& s : g.profile) {
      const std::string p = "gramian.tau[" + format_number(s.tau) + "].";
      r.add(p + "w_min_eig", s.w_min_eig);
      r.add(p + "w_condition", s.w_condition);
      r.add(p + "kernel_integral", s.kernel_integral);
      r.add(p + "gamma_unit", s.gamma_unit);
    }
    r.add("gramian.tau_star", g.tau);
    r.add("gramian.c2", g.c2);
    r.add("gramian.c2_sup_over_grid", g.c2_sup_over_grid);
    r.add("gramian.gamma_of_delta", g.gamma_of_delta);
  } else if (!a.gram_error.empty()) {
    r.add("gramian.error", a.gram_error);
  }
  if (a.certificate) {
    const IssCertificate& c = *a.certificate;
    r.add("certificate.kind", to_string(c.kind));
    r.add("certificate.k1", c.k1);
    r.add("certificate.k2", c.k2);
    r.add("certificate.delta", c.delta);
    r.add("certificate.alpha", c.alpha);
    r.add("certificate.scale", c.scale);
    r.add("certificate.c2", c.c2);
    r.add("certificate.omega", c.omega);
    for (std::size_t i = 0; i < c.notes.size(); ++i)
      r.add("certificate.note." + std::to_string(i + 1), c.notes[i]);
  } else {
    r.add("certificate.kind", "refused");
    r.add("certificate.refused_hypothesis", a.refused_hypothesis);
    r.add("certificate.refusal", a.refusal);
  }
}

void append_metrics(KeyValueReport& r, const std::string& prefix, const StabilityMetrics& m,
                    const Trajectory& tr) {
  r.add(prefix + "samples", tr.size());
  r.add(prefix + "diverged", tr.diverged);
  r.add(prefix + "chattering", tr.chattering);
  if (!tr.diagnostic.empty()) r.add(prefix + "diagnostic", tr.diagnostic);
  r.add(prefix + "x0_norm", m.x0_norm);
  r.add(prefix + "final_norm", m.final_norm);
  r.add(prefix + "terminal_radius", m.terminal_radius);
  r.add(prefix + "omega", m.omega);
  r.add(prefix + "ball_radius", m.ball_radius);
  r.add(prefix + "time_to_ball", m.time_to_ball ? format_number(*m.time_to_ball) : "never");
  r.add(prefix + "fit_available", m.fit_available);
  if (m.fit_available) {
    r.add(prefix + "eps_hat", m.eps_hat);
    r.add(prefix + "c1_hat", m.c1_hat);
    r.add(prefix + "c1_fit", m.c1_fit);
    r.add(prefix + "fit_start", m.fit_start);
    r.add(prefix + "fit_end", m.fit_end);
    r.add(prefix + "fit_samples", m.fit_samples);
  }
  r.add(prefix + "envelope_ok", m.envelope_ok);
}

void append_comparison(KeyValueReport& r, const RunComparison& c) {
  append_metrics(r, "baseline.", c.baseline_metrics, c.baseline);
  append_metrics(r, "extended.", c.extended_metrics, c.extended);
  r.add("comparison.extended_smaller", c.extended_smaller);
  r.add("comparison.radius_ratio", c.radius_ratio);
}

std::string certificate_json(const std::string& scenario, const AnalysisResult& a) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["scenario"] = scenario;
  const GeometryCertificate& g = a.validation.geometry;
  j["geometry"] = {{"a2_holds", g.a2_holds}, {"delta", g.delta}, {"alpha", g.alpha},
                   {"method", to_string(g.method)}};
  j["spr"] = ordered_json::array();
  for (const auto& c : a.spr)
    j["spr"].push_back({{"label", c.label},
                        {"k1", c.pair.k1},
                        {"k2", c.pair.k2},
                        {"verdict", to_string(c.report.verdict)},
                        {"min_hermitian_eig", c.report.min_hermitian_eig},
                        {"stable_transformed", c.report.stable_transformed}});
  if (a.gram) {
    ordered_json prof = ordered_json::array();
    for (const auto& s : a.gram->profile)
      prof.push_back({{"tau", s.tau}, {"gamma_unit", s.gamma_unit}});
    j["gramian"] = {{"c2", a.gram->c2},
                    {"tau_star", a.gram->tau},
                    {"c2_sup_over_grid", a.gram->c2_sup_over_grid},
                    {"restricted", a.gram->restricted},
                    {"profile", prof}};
  }
  if (a.certificate) {
    const IssCertificate& c = *a.certificate;
    j["certificate"] = {{"kind", to_string(c.kind)}, {"k1", c.k1},     {"k2", c.k2},
                        {"c2", c.c2},                {"omega", c.omega}, {"notes", c.notes}};
  } else {
    j["certificate"] = {{"kind", "refused"},
                        {"hypothesis", a.refused_hypothesis},
                        {"detail", a.refusal}};
  }
  return j.dump(2) + "\n";
}

}  // namespace naclab

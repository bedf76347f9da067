#include "naclab/analysis.h"

#include <cmath>

#include "naclab/errors.h"

namespace naclab {

namespace {

constexpr std::size_t kSectorSamples = 100000;
constexpr std::size_t kEmpiricalSamples = 20000;

GeometryOptions geometry_options(const Scenario& sc) {
  GeometryOptions g;
  g.seed = sc.analysis.seed;
  return g;
}

}  // namespace

ValidationResult validate_scenario(const Scenario& sc) {
  ValidationResult v;
  v.structural = check_structural(sc.system);
  if (!v.structural.stabilizable) v.failures.push_back("structural: (A, B) is not stabilizable");
  if (!v.structural.detectable) v.failures.push_back("structural: (A, C) is not detectable");

  v.geometry = certify_geometry(sc.actions.base, geometry_options(sc));
  if (!v.geometry.a2_holds) {
    v.failures.push_back("A2: " + v.geometry.reason);
    return v;
  }
  if (!(v.geometry.alpha > 0.0))
    v.failures.push_back("geometry: covering constant alpha <= 0");

  const ScaleSet& s = sc.actions.scales;
  if (s.kind() == ScaleSet::Kind::kUniform) {
    const double sigma = s.lambda() * v.geometry.delta;
    const auto etas = log_spaced(sigma, std::max(1e4, 10.0 * sigma), kSectorSamples);
    v.quantizer_sector = verify_sector_uniform({s.lambda()}, sigma, etas);
  } else if (s.kind() == ScaleSet::Kind::kLogarithmic) {
    const auto etas = log_spaced(1e-6, 1e6, kSectorSamples);
    v.quantizer_sector = verify_sector_symlog({s.lambda()}, etas);
  }
  if (v.quantizer_sector && !v.quantizer_sector->pass)
    v.failures.push_back("quantizer: sector bound violated on " +
                         std::to_string(v.quantizer_sector->violations) + " samples");
  return v;
}

AnalysisResult analyze_scenario(const Scenario& sc) {
  AnalysisResult r;
  r.validation = validate_scenario(sc);
  if (!r.validation.ok()) {
    r.refused_hypothesis = "validation";
    r.refusal = r.validation.failures.front();
    return r;
  }
  const GeometryCertificate& geo = r.validation.geometry;
  const ScaleSet& scales = sc.actions.scales;
  const SprOptions& opts = sc.analysis.spr;

  CertificateKind kind = CertificateKind::kGenericPractical;
  std::vector<std::pair<std::string, SectorPair>> pairs;
  if (scales.kind() == ScaleSet::Kind::kUniform) {
    kind = CertificateKind::kUniformPractical;
    r.uniform = sector_constants_uniform(geo.delta, geo.alpha);
    pairs.emplace_back("uniform", r.uniform->pair);
  } else if (scales.kind() == ScaleSet::Kind::kLogarithmic) {
    kind = CertificateKind::kLogarithmicExponential;
    r.log = sector_constants_log(scales.lambda(), geo.alpha);
    if (r.log->swapped.ordered()) {
      pairs.emplace_back("log-swapped", r.log->swapped);
      pairs.emplace_back("log-composed", r.log->composed);
    } else {
      pairs.emplace_back("log-composed", r.log->composed);
    }
  }

  for (const auto& [label, pair] : pairs)
    r.spr.push_back({label, pair, check_spr(sc.system, pair.k1, pair.k2, opts)});

  r.empirical = estimate_sector(sc.actions, sc.analysis.sector_radius, kEmpiricalSamples,
                                sc.analysis.seed);
  if (r.empirical->samples > 0 && r.empirical->k1 > 0.0 && r.empirical->k1 <= r.empirical->k2) {
    const SectorPair p{r.empirical->k1, r.empirical->k2};
    r.empirical_spr = SprCase{"empirical", p, check_spr(sc.system, p.k1, p.k2, opts)};
  }

  try {
    r.gram = gamma_and_c2(sc.system, geo.delta, sc.analysis.tau_grid,
                          ObservabilityHandling::kRestrictToObservable);
  } catch (const NumericalError& e) {
    r.gram_error = e.what();
  } catch (const PreconditionError& e) {
    r.gram_error = e.what();
  }

  if (pairs.empty()) {
    r.refused_hypothesis = "sector";
    r.refusal = "a finite scale grid has no positive lower sector bound";
    return r;
  }
  if (!r.gram) {
    r.refused_hypothesis = "gramian";
    r.refusal = r.gram_error;
    return r;
  }
  try {
    r.certificate =
        assemble_certificate(kind, sc.system, geo, scales, r.spr.front().report, *r.gram);
    if (r.log && !r.log->disagree) r.certificate->notes.push_back("log sector conventions agree");
  } catch (const CertificateRefused& e) {
    r.refused_hypothesis = e.hypothesis();
    r.refusal = e.what();
  }
  return r;
}

double certified_omega(const AnalysisResult& r) {
  return r.certificate ? r.certificate->omega : 0.0;
}

}  // namespace naclab

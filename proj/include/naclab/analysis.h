#pragma once

#include <optional>
#include <string>
#include <vector>

#include "naclab/action_set.h"
#include "naclab/lti.h"
#include "naclab/nac.h"
#include "naclab/quantizers.h"
#include "naclab/sim.h"

// Validation and certification pipelines over a parsed scenario; the CLI
// commands are thin wrappers that format these results.
namespace naclab {

struct ValidationResult {
  StructuralReport structural;
  GeometryCertificate geometry;
  std::optional<SectorCheckReport> quantizer_sector;  // absent for finite grids
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Structural (stabilizable + detectable), geometry (A2, alpha > 0) and
/// quantizer sector checks.
ValidationResult validate_scenario(const Scenario& sc);

struct SprCase {
  std::string label;
  SectorPair pair;
  SprReport report;
};

struct AnalysisResult {
  ValidationResult validation;
  std::optional<UniformSectorConstants> uniform;
  std::optional<LogSectorConstants> log;
  std::vector<SprCase> spr;  // spr[0] is the pair the certificate uses
  std::optional<EmpiricalSector> empirical;
  std::optional<SprCase> empirical_spr;
  std::optional<GramianBound> gram;
  std::string gram_error;
  std::optional<IssCertificate> certificate;
  std::string refused_hypothesis;  // empty when a certificate was issued
  std::string refusal;
  bool ok() const { return certificate.has_value(); }
};

/// Sector constants of the scenario's extension, SPR checks of every
/// candidate pair, the Gramian bound and the certificate. Never throws for
/// failed hypotheses; they are reported through refused_hypothesis.
AnalysisResult analyze_scenario(const Scenario& sc);

/// Certificate radius, or 0 when no certificate was issued.
double certified_omega(const AnalysisResult& r);

}  // namespace naclab

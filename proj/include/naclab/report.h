#pragma once

#include <string>
#include <utility>
#include <vector>

#include "naclab/analysis.h"
#include "naclab/sim.h"

namespace naclab {

/// Ordered `key: value` lines. Numbers use 12 significant digits.
class KeyValueReport {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }
  void add(const std::string& key, double value);
  void add(const std::string& key, int value);
  void add(const std::string& key, std::size_t value);
  void add(const std::string& key, bool value);

  /// First value stored under `key`; throws std::out_of_range if absent.
  const std::string& get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_number(double v);

void append_validation(KeyValueReport& r, const ValidationResult& v);
void append_analysis(KeyValueReport& r, const AnalysisResult& a);
void append_metrics(KeyValueReport& r, const std::string& prefix, const StabilityMetrics& m,
                    const Trajectory& tr);
void append_comparison(KeyValueReport& r, const RunComparison& c);

/// Machine-readable certificate record (JSON object).
std::string certificate_json(const std::string& scenario, const AnalysisResult& a);

}  // namespace naclab

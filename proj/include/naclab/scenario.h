#pragma once

#include <string>
#include <vector>

#include "naclab/sim.h"

// Scenario text format. Line oriented; '#' starts a comment. Top level holds
// `name: <text>` and five blocks, each `block {` ... `}` with `key: value`
// lines. Array values may span several lines until the brackets balance.
//
//   system     { A: [[..],..]  B: [[..],..]  C: [[..],..] }
//   actions    { directions: [[..],..] | angles: [..] }      (radians, (cos t, sin t))
//   quantizer  { kind: uniform | logarithmic-symmetric | minimal | explicit
//                lambda: <num>  scales: [..]  min_exponent: <int> }
//   simulation { x0: [..]  t_end: <num>  dt: <num>  hold: <num>
//                disturbance: [[t, d1, .., dm], ..] }
//   analysis   { tau: [..]  omega_min  omega_max  omega_points  margin
//                include_dc: true|false  seed  sector_radius }
//
// Unknown blocks or keys, duplicates and missing required keys are errors.
namespace naclab {

/// Throws ParseError carrying the line and field of the first problem.
Scenario parse_scenario(const std::string& text);

/// Serializes a scenario in the format above; parse_scenario(format_scenario(s))
/// reproduces s (directions are written as coordinates).
std::string format_scenario(const Scenario& sc);

std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
/// Throws PreconditionError for an unknown name.
std::string builtin_scenario_text(const std::string& name);

/// A built-in name is used when `path` is one and no such file exists.
/// Throws std::runtime_error when the file cannot be read.
Scenario load_scenario(const std::string& path);

}  // namespace naclab

#include "naclab/scenario.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "naclab/errors.h"

namespace naclab {

namespace {

struct Node {
  bool is_list = false;
  double number = 0.0;
  std::vector<Node> items;
};

struct Entry {
  std::string value;
  int line = 0;
};

using Block = std::map<std::string, Entry>;

struct Document {
  std::optional<Entry> name;
  std::map<std::string, Block> blocks;
  std::map<std::string, int> block_lines;
};

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"system", {"A", "B", "C"}},
      {"actions", {"directions", "angles"}},
      {"quantizer", {"kind", "lambda", "scales", "min_exponent"}},
      {"simulation", {"x0", "t_end", "dt", "hold", "disturbance"}},
      {"analysis",
       {"tau", "omega_min", "omega_max", "omega_points", "margin", "include_dc", "seed",
        "sector_radius"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  for (char c : s) depth += (c == '[') - (c == ']');
  return depth;
}

Document split(const std::string& text) {
  Document doc;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  std::string current;
  Block* block = nullptr;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == "}") {
      if (block == nullptr) throw ParseError(lineno, "}", "unmatched closing brace");
      block = nullptr;
      continue;
    }
    if (line.back() == '{') {
      if (block != nullptr) throw ParseError(lineno, current, "blocks cannot nest");
      current = trim(line.substr(0, line.size() - 1));
      if (!allowed_keys().contains(current)) throw ParseError(lineno, current, "unknown block");
      if (doc.blocks.contains(current)) throw ParseError(lineno, current, "duplicate block");
      block = &doc.blocks[current];
      doc.block_lines[current] = lineno;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(lineno, line, "expected 'key: value'");
    const std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    const int start = lineno;
    while (bracket_balance(value) > 0 && std::getline(is, raw)) {
      ++lineno;
      value += " " + trim(raw.substr(0, raw.find('#')));
    }
    if (bracket_balance(value) != 0) throw ParseError(start, key, "unbalanced brackets");
    if (value.empty()) throw ParseError(start, key, "missing value");
    if (block == nullptr) {
      if (key != "name") throw ParseError(start, key, "unknown top-level key");
      if (doc.name) throw ParseError(start, key, "duplicate key");
      doc.name = Entry{value, start};
      continue;
    }
    if (!allowed_keys().at(current).contains(key))
      throw ParseError(start, key, "unknown key in block '" + current + "'");
    if (block->contains(key)) throw ParseError(start, key, "duplicate key");
    (*block)[key] = Entry{value, start};
  }
  if (block != nullptr) throw ParseError(lineno, current, "block is not closed");
  return doc;
}

class ValueParser {
 public:
  ValueParser(const Entry& e, std::string field) : s_(e.value), line_(e.line), field_(std::move(field)) {}

  Node parse() {
    Node n = value();
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return n;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, field_, what); }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  Node value() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of value");
    Node n;
    if (s_[pos_] == '[') {
      n.is_list = true;
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return n;
      }
      while (true) {
        n.items.push_back(value());
        skip();
        if (pos_ >= s_.size()) fail("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          return n;
        }
        fail("expected ',' or ']' in array");
      }
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    n.number = std::strtod(begin, &end);
    if (end == begin) fail("malformed number near '" + s_.substr(pos_, 12) + "'");
    if (!std::isfinite(n.number)) fail("number is not finite");
    pos_ += static_cast<std::size_t>(end - begin);
    return n;
  }

  const std::string& s_;
  int line_;
  std::string field_;
  std::size_t pos_ = 0;
};

double as_number(const Entry& e, const std::string& field) {
  ValueParser p(e, field);
  const Node n = p.parse();
  if (n.is_list) p.fail("expected a number");
  return n.number;
}

long as_integer(const Entry& e, const std::string& field) {
  const double v = as_number(e, field);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ParseError(e.line, field, "expected an integer");
  return static_cast<long>(v);
}

std::vector<double> as_vector(const Entry& e, const std::string& field) {
  ValueParser p(e, field);
  const Node n = p.parse();
  if (!n.is_list) p.fail("expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : n.items) {
    if (item.is_list) p.fail("expected a flat array of numbers");
    out.push_back(item.number);
  }
  return out;
}

Eigen::MatrixXd as_matrix(const Entry& e, const std::string& field) {
  ValueParser p(e, field);
  const Node n = p.parse();
  if (!n.is_list || n.items.empty()) p.fail("expected a non-empty array of rows");
  const std::size_t cols = n.items[0].items.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n.items.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    const Node& row = n.items[i];
    if (!row.is_list) p.fail("row " + std::to_string(i + 1) + " is not an array");
    if (row.items.size() != cols || cols == 0)
      p.fail("row " + std::to_string(i + 1) + " has " + std::to_string(row.items.size()) +
             " entries, expected " + std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j) {
      if (row.items[j].is_list) p.fail("nested arrays deeper than two levels");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.items[j].number;
    }
  }
  return m;
}

const Block& require_block(const Document& doc, const std::string& name) {
  const auto it = doc.blocks.find(name);
  if (it == doc.blocks.end()) throw ParseError(0, name, "missing block");
  return it->second;
}

const Entry& require_key(const Document& doc, const std::string& block, const std::string& key) {
  const Block& b = require_block(doc, block);
  const auto it = b.find(key);
  if (it == b.end()) throw ParseError(doc.block_lines.at(block), key, "missing required key");
  return it->second;
}

const Entry* find_key(const Document& doc, const std::string& block, const std::string& key) {
  const auto bit = doc.blocks.find(block);
  if (bit == doc.blocks.end()) return nullptr;
  const auto it = bit->second.find(key);
  return it == bit->second.end() ? nullptr : &it->second;
}

template <typename F>
auto rethrow_at(int line, const std::string& field, F&& f) {
  try {
    return f();
  } catch (const PreconditionError& e) {
    throw ParseError(line, field, e.what());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v(i));
  return s + "]";
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i)
    s += (i ? ", " : "") + vector_text(m.row(i).transpose());
  return s + "]";
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  const Document doc = split(text);

  const Entry& ea = require_key(doc, "system", "A");
  const Entry& eb = require_key(doc, "system", "B");
  const Entry& ec = require_key(doc, "system", "C");
  Eigen::MatrixXd a = as_matrix(ea, "A");
  Eigen::MatrixXd b = as_matrix(eb, "B");
  Eigen::MatrixXd c = as_matrix(ec, "C");
  LtiSystem sys = rethrow_at(ea.line, "system", [&] { return LtiSystem(a, b, c); });

  const Entry* dirs = find_key(doc, "actions", "directions");
  const Entry* angles = find_key(doc, "actions", "angles");
  require_block(doc, "actions");
  if ((dirs == nullptr) == (angles == nullptr))
    throw ParseError(doc.block_lines.at("actions"), "actions",
                     "give exactly one of 'directions' or 'angles'");
  ActionSet base = dirs != nullptr
      ? rethrow_at(dirs->line, "directions", [&] {
          const Eigen::MatrixXd rows = as_matrix(*dirs, "directions");
          std::vector<Eigen::VectorXd> v;
          for (int i = 0; i < rows.rows(); ++i) v.push_back(rows.row(i).transpose());
          return ActionSet::from_directions(v);
        })
      : rethrow_at(angles->line, "angles", [&] {
          const std::vector<double> t = as_vector(*angles, "angles");
          return ActionSet::from_angles(t);
        });

  const Entry& ekind = require_key(doc, "quantizer", "kind");
  const Entry* elambda = find_key(doc, "quantizer", "lambda");
  const Entry* escales = find_key(doc, "quantizer", "scales");
  const Entry* eminexp = find_key(doc, "quantizer", "min_exponent");
  auto reject = [](const Entry* e, const std::string& key, const std::string& kind) {
    if (e != nullptr) throw ParseError(e->line, key, "not used by quantizer kind '" + kind + "'");
  };
  QuantizerKind qkind;
  std::optional<ScaleSet> scales;
  const std::string& kind = ekind.value;
  if (kind == "uniform") {
    qkind = QuantizerKind::kUniform;
    if (elambda == nullptr) throw ParseError(ekind.line, "lambda", "uniform quantizer needs lambda");
    reject(escales, "scales", kind);
    reject(eminexp, "min_exponent", kind);
    const double lam = as_number(*elambda, "lambda");
    scales = rethrow_at(elambda->line, "lambda", [&] { return ScaleSet::uniform(lam); });
  } else if (kind == "logarithmic-symmetric") {
    qkind = QuantizerKind::kLogarithmicSymmetric;
    if (elambda == nullptr)
      throw ParseError(ekind.line, "lambda", "logarithmic quantizer needs lambda");
    reject(escales, "scales", kind);
    const double lam = as_number(*elambda, "lambda");
    const long kmin = eminexp ? as_integer(*eminexp, "min_exponent") : -400;
    scales = rethrow_at(elambda->line, "lambda",
                        [&] { return ScaleSet::logarithmic(lam, static_cast<int>(kmin)); });
  } else if (kind == "minimal") {
    qkind = QuantizerKind::kMinimal;
    reject(elambda, "lambda", kind);
    reject(escales, "scales", kind);
    reject(eminexp, "min_exponent", kind);
    scales = ScaleSet::explicit_list({1.0});
  } else if (kind == "explicit") {
    qkind = QuantizerKind::kExplicit;
    reject(elambda, "lambda", kind);
    reject(eminexp, "min_exponent", kind);
    if (escales == nullptr) throw ParseError(ekind.line, "scales", "explicit quantizer needs scales");
    const std::vector<double> list = as_vector(*escales, "scales");
    scales = rethrow_at(escales->line, "scales", [&] { return ScaleSet::explicit_list(list); });
  } else {
    throw ParseError(ekind.line, "kind", "unknown quantizer kind '" + kind + "'");
  }

  Scenario sc{.name = doc.name ? doc.name->value : std::string("unnamed"),
              .system = sys,
              .actions = ExtendedActionSet{base, *scales},
              .quantizer = qkind};

  const Entry& ex0 = require_key(doc, "simulation", "x0");
  const std::vector<double> x0 = as_vector(ex0, "x0");
  sc.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  if (const Entry* e = find_key(doc, "simulation", "t_end")) sc.t_end = as_number(*e, "t_end");
  if (const Entry* e = find_key(doc, "simulation", "dt")) sc.dt = as_number(*e, "dt");
  if (const Entry* e = find_key(doc, "simulation", "hold")) sc.hold = as_number(*e, "hold");
  else sc.hold = sc.dt;
  if (const Entry* e = find_key(doc, "simulation", "disturbance")) {
    const Eigen::MatrixXd table = as_matrix(*e, "disturbance");
    if (table.cols() != sys.m() + 1)
      throw ParseError(e->line, "disturbance", "rows must be [t, d1, .., dm]");
    for (int i = 0; i < table.rows(); ++i) {
      sc.disturbance.times.push_back(table(i, 0));
      sc.disturbance.values.push_back(table.row(i).tail(sys.m()).transpose());
    }
  }

  AnalysisSettings& an = sc.analysis;
  if (const Entry* e = find_key(doc, "analysis", "tau")) an.tau_grid = as_vector(*e, "tau");
  if (const Entry* e = find_key(doc, "analysis", "omega_min")) an.spr.omega_min = as_number(*e, "omega_min");
  if (const Entry* e = find_key(doc, "analysis", "omega_max")) an.spr.omega_max = as_number(*e, "omega_max");
  if (const Entry* e = find_key(doc, "analysis", "omega_points"))
    an.spr.points = static_cast<int>(as_integer(*e, "omega_points"));
  if (const Entry* e = find_key(doc, "analysis", "margin")) an.spr.margin = as_number(*e, "margin");
  if (const Entry* e = find_key(doc, "analysis", "include_dc")) {
    if (e->value != "true" && e->value != "false")
      throw ParseError(e->line, "include_dc", "expected true or false");
    an.spr.include_dc = e->value == "true";
  }
  if (const Entry* e = find_key(doc, "analysis", "seed")) {
    const long s = as_integer(*e, "seed");
    if (s < 0) throw ParseError(e->line, "seed", "seed must be nonnegative");
    an.seed = static_cast<std::uint64_t>(s);
  }
  if (const Entry* e = find_key(doc, "analysis", "sector_radius"))
    an.sector_radius = as_number(*e, "sector_radius");

  const int aline = doc.block_lines.contains("analysis") ? doc.block_lines.at("analysis") : 0;
  if (an.tau_grid.empty()) throw ParseError(aline, "tau", "tau grid is empty");
  for (double t : an.tau_grid)
    if (!(t > 0.0)) throw ParseError(aline, "tau", "every tau must be positive");
  if (!(an.spr.omega_min > 0.0 && an.spr.omega_max >= an.spr.omega_min))
    throw ParseError(aline, "omega_min", "need 0 < omega_min <= omega_max");
  if (an.spr.points < 2) throw ParseError(aline, "omega_points", "need at least 2 points");
  if (!(an.spr.margin >= 0.0)) throw ParseError(aline, "margin", "margin must be nonnegative");
  if (!(an.sector_radius > 0.0)) throw ParseError(aline, "sector_radius", "must be positive");

  rethrow_at(doc.block_lines.at("simulation"), "simulation", [&] {
    sc.validate();
    return 0;
  });
  return sc;
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream os;
  os << "name: " << sc.name << "\n\n";
  os << "system {\n  A: " << matrix_text(sc.system.A()) << "\n  B: " << matrix_text(sc.system.B())
     << "\n  C: " << matrix_text(sc.system.C()) << "\n}\n\n";
  os << "actions {\n  directions: " << matrix_text(sc.actions.base.rows()) << "\n}\n\n";
  os << "quantizer {\n  kind: " << to_string(sc.quantizer) << "\n";
  const ScaleSet& s = sc.actions.scales;
  switch (sc.quantizer) {
    case QuantizerKind::kUniform:
      os << "  lambda: " << fmt17(s.lambda()) << "\n";
      break;
    case QuantizerKind::kLogarithmicSymmetric:
      os << "  lambda: " << fmt17(s.lambda()) << "\n  min_exponent: " << s.min_exponent() << "\n";
      break;
    case QuantizerKind::kMinimal:
      break;
    case QuantizerKind::kExplicit: {
      const Eigen::Map<const Eigen::VectorXd> v(s.scales().data(),
                                                static_cast<Eigen::Index>(s.scales().size()));
      os << "  scales: " << vector_text(v) << "\n";
      break;
    }
  }
  os << "}\n\n";
  os << "simulation {\n  x0: " << vector_text(sc.x0) << "\n  t_end: " << fmt17(sc.t_end)
     << "\n  dt: " << fmt17(sc.dt) << "\n  hold: " << fmt17(sc.hold) << "\n";
  if (!sc.disturbance.empty()) {
    os << "  disturbance: [";
    for (std::size_t i = 0; i < sc.disturbance.times.size(); ++i) {
      Eigen::VectorXd row(sc.disturbance.values[i].size() + 1);
      row << sc.disturbance.times[i], sc.disturbance.values[i];
      os << (i ? ",\n    " : "") << vector_text(row);
    }
    os << "]\n";
  }
  os << "}\n\n";
  const AnalysisSettings& an = sc.analysis;
  const Eigen::Map<const Eigen::VectorXd> tau(an.tau_grid.data(),
                                              static_cast<Eigen::Index>(an.tau_grid.size()));
  os << "analysis {\n  tau: " << vector_text(tau) << "\n  omega_min: " << fmt17(an.spr.omega_min)
     << "\n  omega_max: " << fmt17(an.spr.omega_max) << "\n  omega_points: " << an.spr.points
     << "\n  margin: " << fmt17(an.spr.margin)
     << "\n  include_dc: " << (an.spr.include_dc ? "true" : "false") << "\n  seed: " << an.seed
     << "\n  sector_radius: " << fmt17(an.sector_radius) << "\n}\n";
  return os.str();
}

namespace {

std::string ocean_battery(const std::string& name, const std::string& quantizer) {
  constexpr double pi = std::numbers::pi;
  std::ostringstream os;
  os << "# Four interconnected storage units, two of them charged externally.\n"
        "# Outputs are weighted reservoir volumes; actions are the vertices of an\n"
        "# equilateral triangle, angles t with direction (cos t, sin t).\n"
     << "name: " << name << "\n\n"
     << "system {\n"
        "  A: [[-0.41, 0.2, 0, 0.2],\n"
        "      [0.2, -0.41, 0.2, 0],\n"
        "      [0, 0.2, -0.41, 0.2],\n"
        "      [0.2, 0, 0.2, -0.41]]\n"
        "  B: [[1, 0], [0, 0], [0, 1], [0, 0]]\n"
        "  C: [[0.5, 0.25, 0, 0.25],\n"
        "      [0, 0.25, 0.5, 0.25]]\n"
        "}\n\n"
     << "actions {\n  angles: [" << fmt17(5 * pi / 18) << ", " << fmt17(-7 * pi / 18) << ", "
     << fmt17(-19 * pi / 18) << "]\n}\n\n"
     << "quantizer {\n" << quantizer << "}\n\n"
     << "simulation {\n"
        "  x0: [5, -3, 4, -2]\n"
        "  t_end: 50\n"
        "  dt: 0.001\n"
        "  hold: 0.001\n"
        "}\n\n"
        "analysis {\n"
        "  tau: [0.5, 1, 2, 5, 10]\n"
        "  omega_min: 0.001\n"
        "  omega_max: 1000\n"
        "  omega_points: 400\n"
        "  margin: 1e-9\n"
        "  seed: 12345\n"
        "  sector_radius: 10\n"
        "}\n";
  return os.str();
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"ocean-battery-uniform", "ocean-battery-log", "ocean-battery-minimal"};
}

bool is_builtin_scenario(const std::string& name) {
  for (const auto& n : builtin_scenario_names())
    if (n == name) return true;
  return false;
}

std::string builtin_scenario_text(const std::string& name) {
  if (name == "ocean-battery-uniform")
    return ocean_battery(name, "  kind: uniform\n  lambda: 0.5\n");
  if (name == "ocean-battery-log")
    return ocean_battery(name, "  kind: logarithmic-symmetric\n  lambda: 1.1\n");
  if (name == "ocean-battery-minimal") return ocean_battery(name, "  kind: minimal\n");
  throw PreconditionError("unknown built-in scenario '" + name + "'");
}

Scenario load_scenario(const std::string& path) {
  if (is_builtin_scenario(path) && !std::filesystem::exists(path))
    return parse_scenario(builtin_scenario_text(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace naclab

#include "naclab/cli.h"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <omp.h>

#include "CLI11.hpp"
#include "naclab/analysis.h"
#include "naclab/errors.h"
#include "naclab/report.h"
#include "naclab/scenario.h"
#include "naclab/svg.h"

namespace naclab {

namespace fs = std::filesystem;

namespace {

struct Loaded {
  std::string path;
  std::optional<Scenario> scenario;
};

// Parse failures and unreadable files are reported here and yield no scenario.
Loaded load(const std::string& path, const CliOptions& opts, std::ostream& err) {
  Loaded l{path, std::nullopt};
  try {
    Scenario sc = load_scenario(path);
    if (opts.seed) sc.analysis.seed = *opts.seed;
    l.scenario = std::move(sc);
  } catch (const ParseError& e) {
    err << path << ": parse error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << "\n";
  }
  return l;
}

bool write_file(const fs::path& file, const std::string& content, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  if (ec) {
    err << "cannot create directory '" << file.parent_path().string() << "': " << ec.message()
        << "\n";
    return false;
  }
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  os << content;
  os.close();
  if (!os) {
    err << "cannot write '" << file.string() << "'\n";
    return false;
  }
  return true;
}

std::vector<fs::path> bundle_dirs(const std::vector<std::string>& names, const CliOptions& opts) {
  const fs::path base = opts.out_dir ? fs::path(*opts.out_dir) : fs::path("nac-lab-out");
  std::vector<fs::path> dirs;
  if (names.size() == 1 && opts.out_dir) return {base};
  std::map<std::string, int> seen;
  for (const auto& n : names) {
    const int k = seen[n]++;
    dirs.push_back(base / (k == 0 ? n : n + "-" + std::to_string(k + 1)));
  }
  return dirs;
}

std::string comparison_csv(const RunComparison& c) {
  std::string s = "t,extended_y_norm,baseline_y_norm,extended_x_norm,baseline_x_norm\n";
  const std::size_t n = std::min(c.extended.size(), c.baseline.size());
  char buf[160];
  for (std::size_t k = 0; k < n; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", c.extended.times[k],
                  c.extended.outputs[k].norm(), c.baseline.outputs[k].norm(),
                  c.extended.states[k].norm(), c.baseline.states[k].norm());
    s += buf;
  }
  return s;
}

}  // namespace

int cmd_validate(const std::vector<std::string>& paths, const CliOptions& opts,
                 std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  for (const auto& path : paths) {
    const Loaded l = load(path, opts, err);
    if (!l.scenario) {
      code = std::max(code, kExitIoError);
      continue;
    }
    const ValidationResult v = validate_scenario(*l.scenario);
    KeyValueReport r;
    r.add("scenario", l.scenario->name);
    append_validation(r, v);
    out << r.str();
    if (opts.out_dir && !write_file(fs::path(*opts.out_dir) / (l.scenario->name + "-validation.txt"),
                                    r.str(), err))
      code = std::max(code, kExitIoError);
    if (!v.ok()) {
      for (const auto& f : v.failures) err << l.scenario->name << ": " << f << "\n";
      code = std::max(code, kExitCheckFailed);
    }
  }
  return code;
}

int cmd_analyze(const std::vector<std::string>& paths, const CliOptions& opts,
                std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  for (const auto& path : paths) {
    const Loaded l = load(path, opts, err);
    if (!l.scenario) {
      code = std::max(code, kExitIoError);
      continue;
    }
    const AnalysisResult a = analyze_scenario(*l.scenario);
    KeyValueReport r;
    r.add("scenario", l.scenario->name);
    append_analysis(r, a);
    out << r.str();
    if (opts.out_dir) {
      const fs::path dir = paths.size() == 1 ? fs::path(*opts.out_dir)
                                             : fs::path(*opts.out_dir) / l.scenario->name;
      if (!write_file(dir / "certificate.txt", r.str(), err) ||
          !write_file(dir / "certificate.json", certificate_json(l.scenario->name, a), err))
        code = std::max(code, kExitIoError);
    }
    if (!a.ok()) {
      err << l.scenario->name << ": " << a.refusal << "\n";
      code = std::max(code, kExitCheckFailed);
    }
  }
  return code;
}

int cmd_simulate(const std::vector<std::string>& paths, const CliOptions& opts,
                 std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  std::vector<Scenario> scenarios;
  std::vector<AnalysisResult> analyses;
  for (const auto& path : paths) {
    Loaded l = load(path, opts, err);
    if (!l.scenario) {
      code = std::max(code, kExitIoError);
      continue;
    }
    AnalysisResult a = analyze_scenario(*l.scenario);
    if (!a.ok() && !opts.force) {
      err << l.scenario->name << ": analysis failed (" << a.refusal
          << "); use --force to simulate anyway\n";
      code = std::max(code, kExitCheckFailed);
      continue;
    }
    scenarios.push_back(std::move(*l.scenario));
    analyses.push_back(std::move(a));
  }
  if (scenarios.empty()) return code;

  const std::vector<Trajectory> runs = simulate_batch(scenarios);
  std::vector<std::string> names;
  for (const auto& s : scenarios) names.push_back(s.name);
  const std::vector<fs::path> dirs = bundle_dirs(names, opts);

  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const Scenario& sc = scenarios[i];
    const Trajectory& tr = runs[i];
    const StabilityMetrics m = metrics(tr, certified_omega(analyses[i]));
    KeyValueReport mr;
    mr.add("scenario", sc.name);
    mr.add("certificate.kind", analyses[i].certificate
                                   ? to_string(analyses[i].certificate->kind)
                                   : std::string("refused"));
    append_metrics(mr, "", m, tr);
    out << mr.str();

    KeyValueReport cr;
    cr.add("scenario", sc.name);
    append_analysis(cr, analyses[i]);
    std::ostringstream csv;
    write_csv(csv, tr);

    bool ok = write_file(dirs[i] / "trajectory.csv", csv.str(), err) &&
              write_file(dirs[i] / "metrics.txt", mr.str(), err) &&
              write_file(dirs[i] / "scenario.txt", format_scenario(sc), err) &&
              write_file(dirs[i] / "certificate.txt", cr.str(), err) &&
              write_file(dirs[i] / "certificate.json", certificate_json(sc.name, analyses[i]), err);
    if (ok && opts.plot) {
      ok = write_file(dirs[i] / "output.svg",
                      render_svg({output_panel(tr, sc.name + ": outputs")}), err) &&
           write_file(dirs[i] / "input.svg", render_svg(input_panels(tr)), err);
    }
    if (!ok) code = std::max(code, kExitIoError);
    if (tr.diverged) {
      err << sc.name << ": " << tr.diagnostic << "\n";
      code = std::max(code, kExitCheckFailed);
    }
    out << "bundle: " << dirs[i].string() << "\n";
  }
  return code;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, const CliOptions& opts,
                std::ostream& out, std::ostream& err) {
  const Loaded a = load(path_a, opts, err);
  const Loaded b = load(path_b, opts, err);
  if (!a.scenario || !b.scenario) return kExitIoError;
  const AnalysisResult ana = analyze_scenario(*a.scenario);
  const AnalysisResult anb = analyze_scenario(*b.scenario);
  RunComparison c;
  try {
    c = compare_runs(*b.scenario, *a.scenario, certified_omega(anb), certified_omega(ana));
  } catch (const PreconditionError& e) {
    err << "cannot compare: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  KeyValueReport r;
  r.add("extended.scenario", a.scenario->name);
  r.add("baseline.scenario", b.scenario->name);
  append_comparison(r, c);
  out << r.str();
  const fs::path dir = opts.out_dir ? fs::path(*opts.out_dir)
                                    : fs::path("nac-lab-out") /
                                          (a.scenario->name + "-vs-" + b.scenario->name);
  const bool ok =
      write_file(dir / "comparison.txt", r.str(), err) &&
      write_file(dir / "comparison.csv", comparison_csv(c), err) &&
      write_file(dir / "overlay.svg",
                 render_svg({overlay_panel(c.extended, a.scenario->name, c.baseline,
                                           b.scenario->name)}),
                 err);
  if (!ok) return kExitIoError;
  if (opts.plot) {
    if (!write_file(dir / "output.svg",
                    render_svg({output_panel(c.extended, a.scenario->name + ": outputs"),
                                output_panel(c.baseline, b.scenario->name + ": outputs")}),
                    err))
      return kExitIoError;
  }
  out << "bundle: " << dir.string() << "\n";
  return kExitOk;
}

bool apply_thread_env(std::string* error) {
  const char* v = std::getenv("NAC_LAB_THREADS");
  if (v == nullptr || *v == '\0') return true;
  const std::string s(v);
  int n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 1) {
    *error = "NAC_LAB_THREADS must be a positive integer, got '" + s + "'";
    return false;
  }
  omp_set_num_threads(n);
  return true;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::string env_error;
  if (!apply_thread_env(&env_error)) {
    err << env_error << "\n";
    return kExitIoError;
  }

  CLI::App app{"Nearest-action control laboratory: validate, certify and simulate "
               "quantized output feedback scenarios.",
               "nac-lab"};
  app.require_subcommand(1);
  CliOptions opts;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> paths;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--plot", opts.plot, "Write SVG plots");
    sub->add_option("--seed", seed, "Seed for randomized geometry and sector probes");
    sub->add_flag("--force", opts.force, "Simulate even when the analysis fails");
    sub->add_option("PATH", paths, "Scenario files or built-in scenario names")->required();
  };
  CLI::App* validate = app.add_subcommand("validate", "Structural, geometric and quantizer checks");
  CLI::App* analyze = app.add_subcommand("analyze", "SPR, Gramian bound and certificate");
  CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop simulation bundle");
  CLI::App* compare = app.add_subcommand("compare", "Extended run (first PATH) against a baseline");
  for (CLI::App* sub : {validate, analyze, simulate, compare}) add_common(sub);
  app.footer("Built-in scenarios: ocean-battery-uniform, ocean-battery-log, "
             "ocean-battery-minimal.\nNAC_LAB_THREADS caps the worker count.\n"
             "Exit codes: 0 ok, 1 check failed, 2 I/O or parse error.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run 'nac-lab --help' for usage\n";
    return kExitIoError;
  }
  for (CLI::App* sub : {validate, analyze, simulate, compare}) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) opts.out_dir = out_dir;
    if (sub->count("--seed")) opts.seed = seed;
  }

  try {
    if (validate->parsed()) return cmd_validate(paths, opts, out, err);
    if (analyze->parsed()) return cmd_analyze(paths, opts, out, err);
    if (simulate->parsed()) return cmd_simulate(paths, opts, out, err);
    if (paths.size() != 2) {
      err << "compare needs exactly two PATH arguments (extended, baseline)\n";
      return kExitIoError;
    }
    return cmd_compare(paths[0], paths[1], opts, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace naclab

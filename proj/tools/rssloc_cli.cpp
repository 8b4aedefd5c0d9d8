// rssloc: command-line front end for RSS localization with the opposition-based annealer.
//
// Exit codes: 0 success, 2 input or validation error, 3 numerical or geometry error, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rssloc/rssloc.hpp"

namespace {

using namespace rssloc;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

constexpr std::uint64_t kDefaultSeed = 42;

/// Fails before any work when the directory an output would land in does not exist.
void check_output_path(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent)) throw IoError(path, "output directory does not exist");
}

Comparators to_comparators(const std::vector<std::string>& names) {
  Comparators c;
  for (const auto& n : names) {
    if (n == "lls") {
      c.lls = true;
    } else if (n == "grid" || n == "grid_oracle") {
      c.grid_oracle = true;
    } else if (n == "crlb") {
      c.crlb = true;
    } else if (n != "none") {
      throw ValidationError("unknown comparator '" + n + "' (expected lls, grid, crlb)");
    }
  }
  return c;
}

void print_summary(std::ostream& os, const std::vector<SweepResult>& results) {
  os << std::left << std::setw(8) << "setting" << std::setw(10) << "value" << std::setw(13) << "method"
     << std::setw(10) << "rmse_m" << std::setw(12) << "crlb_m" << "runtime_ms\n";
  for (const auto& r : results) {
    for (const auto& m : r.methods) {
      os << std::left << std::setw(8) << r.setting_name << std::setw(10) << format_double(r.setting_value)
         << std::setw(13) << m.method << std::fixed << std::setprecision(4) << std::setw(10) << m.rmse
         << std::setw(12) << (r.mean_crlb ? *r.mean_crlb : std::nan("")) << std::setprecision(4)
         << m.mean_runtime * 1e3 << '\n'
         << std::defaultfloat;
    }
  }
}

struct LocalizeArgs {
  std::string scenario;
  std::string measurements;
  bool simulate = false;
  std::vector<double> target;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string trace;
};

int cmd_localize(const LocalizeArgs& a) {
  check_output_path(a.trace);
  const Scenario scenario = scenario_from_json(read_json_file(a.scenario));
  SaaConfig config = a.config.empty() ? SaaConfig{} : config_from_json(read_json_file(a.config));
  if (a.seed) config.seed = *a.seed;

  json extra = json::object();
  MeasurementSet meas;
  if (a.simulate) {
    if (!a.measurements.empty()) throw ValidationError("--simulate and --measurements are mutually exclusive");
    if (a.target.size() != 2) throw ValidationError("--simulate needs --target x,y");
    const Position truth{a.target[0], a.target[1]};
    Stream noise(derive_seed(config.seed, {0x6d656173ULL}));
    meas = generate_measurements(scenario, truth, noise);
    extra["truth"] = json::array({truth.x1, truth.x2});
    extra["measurements"] = to_json(meas);
  } else {
    if (a.measurements.empty()) throw ValidationError("either --measurements or --simulate is required");
    meas = measurements_from_json(read_json_file(a.measurements));
  }
  meas.validate_against(scenario);

  LocalizeOptions opts;
  opts.record_trace = !a.trace.empty();
  const SolveReport report = localize(scenario, meas, config, opts);

  json out = to_json(report);
  out["seed"] = config.seed;
  for (auto& [k, v] : extra.items()) out[k] = v;
  if (a.simulate) {
    out["error_m"] = distance(report.estimate, {a.target[0], a.target[1]});
  }
  if (opts.record_trace) {
    std::ostringstream csv;
    write_trace_csv(csv, *report.trace);
    write_text_file(a.trace, csv.str());
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  std::size_t trials = 2000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t n_anchors = 10;
  double sigma = 2.0;
  unsigned threads = 1;
};

ExperimentSpec base_spec(const ExperimentArgs& a) {
  ExperimentSpec spec;
  spec.trials = a.trials;
  spec.master_seed = a.seed;
  spec.n_anchors = {a.n_anchors};
  spec.sigma = {a.sigma};
  spec.threads = a.threads;
  return spec;
}

int cmd_tune(const std::string& table, const ExperimentArgs& a) {
  TuneParameter p;
  if (table == "epsilon") {
    p = TuneParameter::Epsilon;
  } else if (table == "lambda") {
    p = TuneParameter::Lambda;
  } else if (table == "n_max") {
    p = TuneParameter::NMax;
  } else {
    throw ValidationError("unknown table '" + table + "' (expected epsilon, lambda, n_max)");
  }
  const auto results = run_tuning(base_spec(a), p);
  std::cout << "parameter,value,rmse_m,mean_runtime_s,trials\n";
  for (const auto& r : results) {
    const auto& m = r.methods.front();
    std::cout << r.setting_name << ',' << format_double(r.setting_value) << ',' << format_double(m.rmse) << ','
              << format_double(m.mean_runtime) << ',' << r.trials << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  std::string vary;
  std::vector<double> values;
  std::string out;
  std::string json_out;
  std::string trials_out;
  std::vector<std::string> comparators{"lls", "crlb"};
};

int cmd_sweep(const SweepArgs& s, const ExperimentArgs& a) {
  if (s.values.empty()) throw ValidationError("--values must not be empty");
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (!(s.values[i] > s.values[i - 1])) throw ValidationError("--values must be strictly increasing");
  }
  const std::string json_path =
      s.json_out.empty() ? std::filesystem::path(s.out).replace_extension(".json").string() : s.json_out;
  check_output_path(s.out);
  check_output_path(json_path);
  check_output_path(s.trials_out);

  ExperimentSpec spec = base_spec(a);
  spec.comparators = to_comparators(s.comparators);
  if (s.vary == "sigma") {
    spec.sigma = s.values;
  } else if (s.vary == "n") {
    spec.n_anchors.clear();
    for (double v : s.values) {
      if (v < 1 || v != std::floor(v)) throw ValidationError("--vary n needs positive integer values");
      spec.n_anchors.push_back(static_cast<std::size_t>(v));
    }
  } else {
    throw ValidationError("--vary must be sigma or n");
  }
  // A one-element list still labels rows with the swept axis.
  std::vector<std::vector<TrialRecord>> records;
  auto results = run_sweep(spec, s.trials_out.empty() ? nullptr : &records);
  for (auto& r : results) r.setting_name = s.vary;

  export_results(results, ExportFormat::Csv, s.out);
  export_results(results, ExportFormat::Json, json_path);
  if (!s.trials_out.empty()) {
    std::ostringstream csv;
    for (std::size_t i = 0; i < results.size(); ++i) {
      std::ostringstream part;
      write_trials_csv(part, results[i].setting_name, results[i].setting_value, records[i]);
      std::string text = part.str();
      if (i > 0) text.erase(0, text.find('\n') + 1);
      csv << text;
    }
    write_text_file(s.trials_out, csv.str());
  }
  print_summary(std::cout, results);
  return kExitOk;
}

struct OracleArgs {
  double resolution = 0.4;
  unsigned refine = 2;
  double tolerance = 1.05;
  std::string out;
};

int cmd_oracle_compare(const OracleArgs& o, ExperimentArgs a) {
  check_output_path(o.out);
  ExperimentSpec spec = base_spec(a);
  spec.grid = {o.resolution, o.refine};
  spec.comparators.grid_oracle = true;
  spec.validate();
  const auto records = run_trials(spec, spec.settings().front());

  std::size_t within = 0;
  for (const auto& t : records) {
    if (t.cost <= o.tolerance * *t.oracle_cost) ++within;
  }
  const auto summary = summarize(records, "sigma", a.sigma);
  json out{{"trials", records.size()},
           {"within_tolerance", within},
           {"fraction_within", static_cast<double>(within) / static_cast<double>(records.size())},
           {"tolerance", o.tolerance},
           {"rmse_obl_saa_m", summary.method(kMethodOblSaa)->rmse},
           {"rmse_grid_oracle_m", summary.method(kMethodGridOracle)->rmse}};
  if (!o.out.empty()) {
    std::ostringstream csv;
    write_trials_csv(csv, "sigma", a.sigma, records);
    write_text_file(o.out, csv.str());
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

struct SurfaceArgs {
  std::string scenario;
  std::string measurements;
  double pitch = 0.4;
  std::string out;
};

int cmd_surface(const SurfaceArgs& s) {
  check_output_path(s.out);
  if (!(s.pitch > 0.0)) throw ValidationError("--pitch must be > 0");
  const Scenario scenario = scenario_from_json(read_json_file(s.scenario));
  const MeasurementSet meas = measurements_from_json(read_json_file(s.measurements));
  meas.validate_against(scenario);
  std::ostringstream csv;
  write_surface_csv(csv, cost_surface(scenario, meas, s.pitch));
  write_text_file(s.out, csv.str());
  return kExitOk;
}

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a, std::size_t default_trials) {
  a.trials = default_trials;
  cmd->add_option("--trials", a.trials, "Monte-Carlo trials per setting")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
  cmd->add_option("--n-anchors", a.n_anchors, "Anchor count N")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", a.sigma, "Noise standard deviation, dB")->capture_default_str();
  cmd->add_option("--threads", a.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "RSS localization with opposition-based simulated annealing.\n"
      "Defaults: P0 = 10 dB, gamma = 3, d0 = 1 m, area [0,40]^2 m,\n"
      "epsilon = 0.9, lambda = 0.4, n_max = 500, seed = 42."};
  app.require_subcommand(1);

  LocalizeArgs loc;
  auto* localize_cmd = app.add_subcommand("localize", "Estimate one target position; prints the report as JSON");
  localize_cmd->add_option("--scenario", loc.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  localize_cmd->add_option("--measurements", loc.measurements, "Measurements JSON array")->check(CLI::ExistingFile);
  localize_cmd->add_flag("--simulate", loc.simulate, "Simulate measurements at --target instead");
  localize_cmd->add_option("--target", loc.target, "True position x,y for --simulate")->delimiter(',')->expected(2);
  localize_cmd->add_option("--config", loc.config, "Solver config JSON")->check(CLI::ExistingFile);
  localize_cmd->add_option("--seed", loc.seed, "Overrides the config seed (default 42)");
  localize_cmd->add_option("--trace", loc.trace, "Write the annealing trace CSV here");

  std::string table;
  ExperimentArgs tune_args;
  auto* tune_cmd = app.add_subcommand("tune", "Solver parameter study at N = 10, sigma = 2 dB; CSV to stdout");
  tune_cmd->add_option("--table", table, "epsilon, lambda or n_max")->required();
  add_experiment_options(tune_cmd, tune_args, 2000);

  SweepArgs sweep;
  ExperimentArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "RMSE versus sigma or N; writes CSV and JSON");
  sweep_cmd->add_option("--vary", sweep.vary, "sigma or n")->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated, strictly increasing")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out, "CSV output path")->required();
  sweep_cmd->add_option("--json", sweep.json_out, "JSON output path (default: --out with .json)");
  sweep_cmd->add_option("--trials-out", sweep.trials_out, "Per-trial CSV output path");
  sweep_cmd->add_option("--comparators", sweep.comparators, "Any of lls, grid, crlb, none")
      ->delimiter(',')
      ->capture_default_str();
  add_experiment_options(sweep_cmd, sweep_args, 2000);

  OracleArgs oracle;
  ExperimentArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle-compare", "Compare final costs against the grid-search oracle");
  oracle_cmd->add_option("--resolution", oracle.resolution, "Coarse lattice pitch, m")->capture_default_str();
  oracle_cmd->add_option("--refine", oracle.refine, "Refinement levels")->capture_default_str();
  oracle_cmd->add_option("--tolerance", oracle.tolerance, "Cost ratio counted as a match")->capture_default_str();
  oracle_cmd->add_option("--out", oracle.out, "Per-trial CSV output path");
  add_experiment_options(oracle_cmd, oracle_args, 200);

  SurfaceArgs surface;
  auto* surface_cmd = app.add_subcommand("surface", "Dump the ML cost on a lattice as x1,x2,cost CSV");
  surface_cmd->add_option("--scenario", surface.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  surface_cmd->add_option("--measurements", surface.measurements, "Measurements JSON")
      ->required()
      ->check(CLI::ExistingFile);
  surface_cmd->add_option("--pitch", surface.pitch, "Lattice pitch, m")->capture_default_str();
  surface_cmd->add_option("--out", surface.out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*localize_cmd) return cmd_localize(loc);
    if (*tune_cmd) return cmd_tune(table, tune_args);
    if (*sweep_cmd) return cmd_sweep(sweep, sweep_args);
    if (*oracle_cmd) return cmd_oracle_compare(oracle, oracle_args);
    if (*surface_cmd) return cmd_surface(surface);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SingularGeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DegenerateGeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const UndefinedBoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const TrialError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

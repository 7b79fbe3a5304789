#include "ppse/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ppse/analysis.hpp"
#include "ppse/experiment.hpp"

namespace ppse {

namespace {

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string output_base(const std::string& out_path) {
  if (out_path.size() > 4 && out_path.compare(out_path.size() - 4, 4, ".csv") == 0)
    return out_path.substr(0, out_path.size() - 4);
  return out_path;
}

std::string default_out(const std::string& scenario_path) {
  std::string base = basename_of(scenario_path);
  const auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base + ".csv";
}

struct CommonArgs {
  std::vector<std::string> sets;
  int trials = -1;
  long long seed = -1;

  std::vector<std::string> overrides() const {
    std::vector<std::string> o = sets;
    if (trials >= 0) o.push_back("trials=" + std::to_string(trials));
    if (seed >= 0) o.push_back("seed=" + std::to_string(seed));
    return o;
  }
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--set", args.sets, "dotted-path config override key=value (repeatable)")
      ->type_size(1);
  sub->add_option("--trials", args.trials, "override the trial count");
  sub->add_option("--seed", args.seed, "override the base seed");
}

std::vector<std::string> write_run_outputs(const LoadedScenario& ls, const ExperimentResult& res,
                                           const std::string& out_path, bool trace) {
  std::vector<std::string> written;
  const std::string base = output_base(out_path);

  MseSummary summary = res.summary;
  summary.digest = config_digest(ls.doc);
  write_csv(summary, out_path);
  written.push_back(out_path);

  if (ls.config.wants("events")) {
    const std::string events_path = base + ".events.csv";
    write_events_csv(summary, events_path);
    written.push_back(events_path);
  }

  if (trace) {
    const std::string trace_path = base + ".trace.ndjson";
    std::ofstream f(trace_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + trace_path);
    const bool want_kf = ls.config.wants("kf_gap") &&
                         (ls.config.mechanism.kind == MechanismKind::Ppm ||
                          ls.config.mechanism.kind == MechanismKind::None);
    run_trial(ls.config, 0, want_kf, &f);
    written.push_back(trace_path);
  }

  write_manifest(ls, written, base + ".manifest.json");
  return written;
}

int cmd_run(const std::string& scenario_path, const CommonArgs& common, std::string out_path,
            bool trace) {
  const LoadedScenario ls = load_scenario(scenario_path, common.overrides());
  if (out_path.empty()) out_path = default_out(scenario_path);
  const ExperimentResult res = run_monte_carlo(ls.config);
  const auto written = write_run_outputs(ls, res, out_path, trace);
  for (const auto& w : written) std::cout << "wrote " << w << "\n";
  std::cout << "wrote " << output_base(out_path) + ".manifest.json" << "\n";
  return 0;
}

int cmd_analyze(const std::string& scenario_path, const CommonArgs& common) {
  const LoadedScenario ls = load_scenario(scenario_path, common.overrides());
  ls.config.system.validate();
  ls.config.channel_user.validate();
  const BoundednessReport r =
      check_boundedness(ls.config.system, ls.config.channel_user, ls.config.mechanism.ppm);
  const nlohmann::json j{{"delta_n", r.delta_n},
                         {"eta_star", r.eta_star},
                         {"lambda_bar", r.lambda_bar},
                         {"cond_encoder", r.cond_encoder},
                         {"cond_channel", r.cond_channel},
                         {"encoder_ok", r.encoder_ok},
                         {"channel_ok", r.channel_ok},
                         {"alpha", r.alpha},
                         {"beta", r.beta},
                         {"u_cal", r.u_cal}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& scenario_paths, const CommonArgs& common,
                std::string out_path, bool trace) {
  std::vector<LoadedScenario> loaded;
  loaded.reserve(scenario_paths.size());
  for (const auto& path : scenario_paths) loaded.push_back(load_scenario(path, common.overrides()));
  if (out_path.empty()) out_path = "compare.csv";
  const std::string base = output_base(out_path);

  const std::vector<ExperimentResult> results = compare_mechanisms(loaded);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string label_base = base + "_" + results[i].summary.label;
    LoadedScenario labeled = loaded[i];
    std::vector<std::string> written;
    const std::string csv_path = label_base + ".csv";
    write_csv(results[i].summary, csv_path);
    written.push_back(csv_path);
    if (labeled.config.wants("events")) {
      const std::string events_path = label_base + ".events.csv";
      write_events_csv(results[i].summary, events_path);
      written.push_back(events_path);
    }
    if (trace) {
      const std::string trace_path = label_base + ".trace.ndjson";
      std::ofstream f(trace_path, std::ios::binary);
      if (!f) throw ConfigError("cannot open output file: " + trace_path);
      run_trial(labeled.config, 0, false, &f);
      written.push_back(trace_path);
    }
    write_manifest(labeled, written, label_base + ".manifest.json");
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
    std::cout << "wrote " << label_base + ".manifest.json" << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& scenario_path, const CommonArgs& common) {
  const LoadedScenario ls = load_scenario(scenario_path, common.overrides());
  const auto violations = collect_violations(ls.config);
  if (violations.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << v << "\n";
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("ppse");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<char*> argv;
  argv.reserve(argv_store.size());
  for (auto& a : argv_store) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Markov-channel remote state estimation with encoded innovations"};
  app.require_subcommand(1);

  std::string run_scenario, run_out;
  bool run_trace = false;
  CommonArgs run_common;
  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write per-step CSV");
  run->add_option("scenario", run_scenario, "scenario JSON file")->required();
  run->add_option("-o,--out", run_out, "output CSV path");
  run->add_flag("--trace", run_trace, "write a per-step NDJSON trace of trial 0");
  add_common(run, run_common);

  std::string analyze_scenario;
  CommonArgs analyze_common;
  CLI::App* analyze = app.add_subcommand("analyze", "print the boundedness report as JSON");
  analyze->add_option("scenario", analyze_scenario, "scenario JSON file")->required();
  add_common(analyze, analyze_common);

  std::vector<std::string> compare_scenarios;
  std::string compare_out;
  bool compare_trace = false;
  CommonArgs compare_common;
  CLI::App* compare =
      app.add_subcommand("compare", "run several mechanisms on shared realizations");
  compare->add_option("scenarios", compare_scenarios, "scenario JSON files")
      ->required()
      ->expected(1, -1);
  compare->add_option("-o,--out", compare_out, "output CSV base path");
  compare->add_flag("--trace", compare_trace, "write per-step NDJSON traces of trial 0");
  add_common(compare, compare_common);

  std::string validate_scenario_path;
  CommonArgs validate_common;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario without simulating");
  validate->add_option("scenario", validate_scenario_path, "scenario JSON file")->required();
  add_common(validate, validate_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_scenario, run_common, run_out, run_trace);
    if (analyze->parsed()) return cmd_analyze(analyze_scenario, analyze_common);
    if (compare->parsed())
      return cmd_compare(compare_scenarios, compare_common, compare_out, compare_trace);
    if (validate->parsed()) return cmd_validate(validate_scenario_path, validate_common);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ppse

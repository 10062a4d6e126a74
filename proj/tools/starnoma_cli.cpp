// Command-line front end: convergence runs, element/power sweeps, the
// optimal-configuration dump, and config validation. Errors leave a
// machine-readable JSON report on stderr and a nonzero exit code.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "starnoma/harness.hpp"

namespace fs = std::filesystem;
using namespace starnoma;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void report_error(const std::string& kind, const std::string& message,
                  const std::vector<std::string>& fields = {}) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  if (!fields.empty()) j["fields"] = fields;
  std::cerr << j.dump() << "\n";
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds;
  int episodes = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out = true) {
  cmd->add_option("-c,--config", opts.config_path, "experiment config (JSON)")->required();
  if (needs_out) cmd->add_option("-o,--out", opts.out_dir, "output directory");
  cmd->add_option("--seeds", opts.seeds, "override the config seed list");
  cmd->add_option("--episodes", opts.episodes, "override the episode count");
}

// Loads, applies overrides, validates. Throws std::invalid_argument with the
// collected field list on validation failure.
ExperimentConfig load_and_check(const CommonOpts& opts, std::vector<std::string>* fields) {
  ExperimentConfig cfg = load_config(opts.config_path);
  if (!opts.seeds.empty()) cfg.seeds = opts.seeds;
  if (opts.episodes > 0) cfg.hp.episodes = opts.episodes;
  auto errors = validate_config(cfg);
  if (!errors.empty()) {
    *fields = std::move(errors);
    throw std::invalid_argument("configuration is invalid");
  }
  return cfg;
}

void write_records(const fs::path& dir, const ExperimentConfig& cfg,
                   const std::vector<RunRecord>& records, const std::string& sweep_kind) {
  write_convergence_outputs(dir, records);
  if (sweep_kind == "elements") {
    std::ofstream os(dir / "element_sweep.csv");
    write_element_sweep_csv(os, records);
  } else if (sweep_kind == "power") {
    std::ofstream os(dir / "power_sweep.csv");
    write_power_sweep_csv(os, records, cfg.users);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor multi-surface NOMA downlink simulator and beamforming trainer"};
  app.require_subcommand(1);

  CommonOpts converge_opts, elem_opts, power_opts, dump_opts, validate_opts;

  CLI::App* converge = app.add_subcommand("converge", "train every (algorithm, seed) cell");
  add_common(converge, converge_opts);

  CLI::App* sweep_elements =
      app.add_subcommand("sweep-elements", "repeat the convergence run per element count");
  add_common(sweep_elements, elem_opts);

  CLI::App* sweep_power =
      app.add_subcommand("sweep-power", "repeat the convergence run per power budget");
  add_common(sweep_power, power_opts);

  CLI::App* dump = app.add_subcommand("dump-optimal",
                                       "train the two-agent learner and dump the final surface "
                                       "amplitudes and per-cluster beam powers");
  add_common(dump, dump_opts);
  std::string checkpoint_out;
  dump->add_option("--save-checkpoint", checkpoint_out, "also write the trained agents here");

  CLI::App* validate = app.add_subcommand("validate-config", "check a config file and exit");
  add_common(validate, validate_opts, /*needs_out=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> fields;
    try {
      if (converge->parsed()) {
        const ExperimentConfig cfg = load_and_check(converge_opts, &fields);
        const auto records = run_convergence(cfg);
        write_records(converge_opts.out_dir, cfg, records, "");
        std::cout << "wrote " << records.size() << " records to " << converge_opts.out_dir
                  << "\n";
      } else if (sweep_elements->parsed()) {
        const ExperimentConfig cfg = load_and_check(elem_opts, &fields);
        const auto records = run_element_sweep(cfg);
        write_records(elem_opts.out_dir, cfg, records, "elements");
        std::cout << "wrote " << records.size() << " records to " << elem_opts.out_dir << "\n";
      } else if (sweep_power->parsed()) {
        const ExperimentConfig cfg = load_and_check(power_opts, &fields);
        const auto records = run_power_sweep(cfg);
        write_records(power_opts.out_dir, cfg, records, "power");
        std::cout << "wrote " << records.size() << " records to " << power_opts.out_dir << "\n";
      } else if (dump->parsed()) {
        const ExperimentConfig cfg = load_and_check(dump_opts, &fields);
        const std::uint64_t seed = cfg.seeds.front();
        const EnvSettings env = make_env_settings(cfg);
        const TrainResult tr = train(Algorithm::mappo, env, cfg.hp, seed);
        const OptimalReport rep = optimal_report(tr.final_eval, env.layout);
        write_optimal_outputs(dump_opts.out_dir, rep);
        if (!checkpoint_out.empty()) {
          std::ofstream os(checkpoint_out);
          save_agents(os, tr);
        }
        std::cout << "wrote optimal-configuration report to " << dump_opts.out_dir << "\n";
        for (size_t l = 0; l < rep.side_sums.size(); ++l)
          std::cout << "surface " << l << ": away-from-AP " << rep.side_sums[l].away_from_ap
                    << " vs toward-AP " << rep.side_sums[l].toward_ap << "\n";
      } else if (validate->parsed()) {
        const ExperimentConfig cfg = load_and_check(validate_opts, &fields);
        std::cout << "config ok, hash " << config_hash(cfg) << "\n";
      }
    } catch (const std::invalid_argument& e) {
      report_error("validation", e.what(), fields);
      return kExitValidation;
    }
  } catch (const std::exception& e) {
    report_error("runtime", e.what());
    return kExitRuntime;
  }
  return 0;
}

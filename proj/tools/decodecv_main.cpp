#include "decodecv/config.hpp"
#include "decodecv/harness.hpp"
#include "decodecv/report.hpp"
#include "decodecv/rng.hpp"
#include "decodecv/simulator.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace decodecv;

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::string> out;
  std::optional<int> jobs;
  bool no_normalization = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--repeats", o.repeats, "simulation repeats");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-variance-normalization", o.no_normalization,
                "skip per-feature variance normalization");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
  } else {
    c.simulation = SimulationSource{};
  }
  if (o.seed) c.seed = *o.seed;
  if (o.repeats) {
    if (*o.repeats == 0) throw ConfigError("--repeats must be at least 1");
    c.repeats = *o.repeats;
  }
  if (o.out) c.output_dir = *o.out;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.no_normalization) c.preprocessing.normalize = false;
  c.validate();
  c.check_files();
  return c;
}

void progress(const std::string& msg) { std::cerr << msg << '\n'; }

int finish(const BenchmarkResult& r) {
  if (!r.complete) {
    std::cout << "stopped after " << r.units_done << "/" << r.units_total
              << " units; rerun the same command to resume\n";
    return 0;
  }
  std::cout << "wrote " << r.records.size() << " records to " << r.csv_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-validation and tuning benchmarks for linear decoders"};
  app.require_subcommand(1);

  Overrides sim_o;
  auto* simulate = app.add_subcommand("simulate", "write synthetic train/test CSV files");
  add_common(simulate, sim_o, false);

  auto* run = app.add_subcommand("run", "run a benchmark");
  run->require_subcommand(1);
  Overrides cv_o;
  auto* cv = run->add_subcommand("cv-benchmark", "cross-validation estimates vs held-out accuracy");
  add_common(cv, cv_o, true);
  Overrides tune_o;
  auto* tuning = run->add_subcommand("tuning-benchmark", "hyper-parameter tuning strategies");
  add_common(tuning, tune_o, true);

  auto* report = app.add_subcommand("report", "summarize results CSV files");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("inputs", report_inputs, "results CSV files")->required();
  report->add_option("--out", report_out, "output directory (default: next to the first input)");

  Overrides val_o;
  auto* validate = app.add_subcommand("validate-config", "check a config file and print its hash");
  validate->add_option("--config", val_o.config, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*simulate) {
      const auto c = resolve(sim_o);
      if (!c.simulation) throw ConfigError("simulate needs a simulation data source");
      const auto& src = *c.simulation;
      fs::create_directories(c.output_dir);
      for (std::size_t t = 0; t < src.mu.size(); ++t) {
        auto sim = src.base;
        sim.mu = src.mu[t];
        sim.seed = derive_seed(c.seed, {seed_task_data, t});
        const auto data = generate(sim);
        const auto stem = c.output_dir / ("sim_" + mu_task_name(sim.mu));
        write_csv(data.train, fs::path(stem.string() + "_train.csv"));
        write_csv(data.test, fs::path(stem.string() + "_test.csv"));
        const nlohmann::json sidecar{{"mu", sim.mu},
                                     {"n_features", sim.n_features},
                                     {"n_train", sim.n_train},
                                     {"n_test", sim.n_test},
                                     {"smoothing_sigma", sim.smoothing_sigma},
                                     {"n_blocks", sim.n_blocks},
                                     {"rescale_noise", sim.rescale_noise},
                                     {"label_layout", to_string(sim.label_layout)},
                                     {"run_length", sim.run_length},
                                     {"independent_blocks", sim.independent_blocks},
                                     {"master_seed", c.seed},
                                     {"seed", sim.seed}};
        std::ofstream(stem.string() + ".json") << sidecar.dump(2) << '\n';
        std::cout << "wrote " << stem.string() << "_{train,test}.csv\n";
      }
      return 0;
    }
    if (*cv) return finish(run_cv_benchmark(resolve(cv_o), true, progress));
    if (*tuning) return finish(run_tuning_benchmark(resolve(tune_o), true, progress));
    if (*report) {
      std::vector<fs::path> inputs(report_inputs.begin(), report_inputs.end());
      const fs::path out = report_out.empty() ? inputs.front().parent_path() / "report"
                                              : fs::path(report_out);
      report_files(inputs, out);
      std::cout << "wrote " << (out / "report.md").string() << '\n';
      return 0;
    }
    if (*validate) {
      auto c = load_config(val_o.config);
      c.validate();
      c.check_files();
      std::cout << "ok " << config_hash(c) << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_runtime;
}

#pragma once

#include "decodecv/decoder.hpp"
#include "decodecv/simulator.hpp"
#include "decodecv/splitters.hpp"
#include "decodecv/tuning.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decodecv {

// Invalid configuration. what() carries "file:line: message" when the
// location is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synthetic tasks: one per mu value, sharing the other generator settings.
struct SimulationSource {
  std::vector<double> mu{0.05, 0.1, 0.2};
  SimulationConfig base;
};

struct ValidationSpec {
  std::size_t n_splits = 10;
  double fraction = 0.5;
  bool stratify = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::optional<SimulationSource> simulation;
  std::vector<std::filesystem::path> csv_files;  // resolved against the config dir

  std::size_t repeats = 100;  // simulation repeats in the cv benchmark
  ValidationSpec validation;
  std::vector<DecoderSpec> decoders;           // tuning benchmark
  DecoderSpec cv_decoder;                      // cv benchmark
  std::vector<TuningStrategy> strategies;
  std::vector<SplitterSpec> cv_strategies;
  PreprocessOptions preprocessing{true, 0.2};

  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  int jobs = 1;
  bool record_runtime = false;
  std::optional<std::size_t> max_units;  // stop early (partial results kept)

  ExperimentConfig();
  // Structural checks; does not touch the filesystem.
  void validate() const;
  // Checks that every referenced file exists.
  void check_files() const;
};

std::vector<DecoderSpec> default_decoders();
std::vector<TuningStrategy> default_strategies();
std::vector<SplitterSpec> default_cv_strategies();

// Parses a strategy name: refit, average, C=<value>.
TuningStrategy strategy_from_string(const std::string& text);
// Parses loo_sample, loo_block, shuffle_<n>.
SplitterSpec splitter_from_string(const std::string& text, double test_fraction = 0.2);

ExperimentConfig config_from_json(const nlohmann::json& j);
// Reads a JSON config file. Errors carry the file and line of the
// offending entry.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

// Canonical form (sorted keys, every field explicit). Run-control fields
// (output_dir, jobs, max_units) are not part of the experiment identity and
// are left out of the hash.
nlohmann::json to_json(const ExperimentConfig& config);
std::string canonical_dump(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

}  // namespace decodecv

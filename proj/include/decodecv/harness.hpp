#pragma once

#include "decodecv/config.hpp"
#include "decodecv/evaluation.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace decodecv {

// Outcome of one benchmark invocation. `complete` is false when the run
// stopped at `max_units`; the finished units stay in the partial file and a
// later run with the same config picks up from there.
struct BenchmarkResult {
  std::vector<ExperimentRecord> records;  // fixed order, independent of jobs
  std::vector<LinearModel> models;        // tuning benchmark: one per record
  bool complete = true;
  std::size_t units_done = 0;
  std::size_t units_total = 0;
  std::filesystem::path csv_path;  // empty when nothing was written
};

using ProgressFn = std::function<void(const std::string&)>;

// Seed tags for the counter-based scheme. Every work unit draws its
// randomness from derive_seed(config.seed, {tag, task, ...}).
enum SeedTag : std::uint64_t {
  seed_cv_data = 1,
  seed_cv_plan = 2,
  seed_task_data = 3,
  seed_validation = 4,
  seed_inner = 5,
};

// Simulation repeats (or validation splits for imported data) x CV
// strategies; cv estimates are compared with held-out accuracy.
// When `write_outputs` is set, results, sidecars and the partial file go to
// config.output_dir.
BenchmarkResult run_cv_benchmark(const ExperimentConfig& config, bool write_outputs = true,
                                 const ProgressFn& progress = {});

// Validation splits x decoders x tuning strategies, with stability filled
// in per (task, decoder, strategy).
BenchmarkResult run_tuning_benchmark(const ExperimentConfig& config, bool write_outputs = true,
                                     const ProgressFn& progress = {});

// Tasks of a config, in run order: one per mu value or per CSV file.
struct TaskData {
  std::string dataset;
  std::string task;
  Dataset data;
};
std::vector<TaskData> load_tasks(const ExperimentConfig& config);

// Task label used for simulated data, e.g. "mu=0.05".
std::string mu_task_name(double mu);

}  // namespace decodecv

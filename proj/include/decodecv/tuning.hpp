#pragma once

#include "decodecv/decoder.hpp"
#include "decodecv/splitters.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace decodecv {

// n log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);
// 11 values, 1e-5 ... 1e5.
std::vector<double> default_C_grid();

enum class StrategyKind { refit_best, average_best, fixed };

struct TuningStrategy {
  StrategyKind kind = StrategyKind::refit_best;
  double fixed_C = 1.0;  // used when kind == fixed
  std::vector<double> grid = default_C_grid();
  SplitterSpec inner{SplitterKind::shuffled_block, 10, 0.2, false};

  static TuningStrategy refit(std::vector<double> grid = default_C_grid());
  static TuningStrategy average(std::vector<double> grid = default_C_grid());
  static TuningStrategy fixed(double C);

  // "refit", "average", "C=1", "C=1000", ...
  std::string name() const;
  void validate() const;
};

// Accuracy of every (C, inner split) pair; a split whose training side is
// single-class is marked invalid and excluded from means.
struct TuningTable {
  std::vector<double> grid;
  std::size_t n_splits = 0;
  std::vector<double> accuracy;    // grid-major: accuracy[g * n_splits + s]
  std::vector<bool> split_valid;

  double at(std::size_t g, std::size_t s) const { return accuracy[g * n_splits + s]; }
  std::size_t n_invalid() const;
  // Mean over valid splits for each C (pairwise summation, fixed order).
  std::vector<double> mean_curve() const;
  bool empty() const { return grid.empty(); }
};

// Full factorial run plus the fitted per-cell models (full feature space).
struct GridRun {
  TuningTable table;
  std::vector<LinearModel> models;  // same layout as table.accuracy
};

struct TuningOutcome {
  StrategyKind kind = StrategyKind::fixed;
  LinearModel model;                   // final decision function, raw features
  std::optional<TrainedModel> trained; // refit / fixed
  std::vector<double> chosen_C;        // one value, or one per split (average)
  TuningTable curve;                   // empty for fixed
  double cv_estimate = 0.0;            // inner-CV accuracy at the choice; NaN for fixed
};

GridRun run_grid(const Dataset& decoding_set, const DecoderSpec& family,
                 const std::vector<double>& grid, const SplitPlan& inner_plan,
                 const PreprocessOptions& preprocessing, int jobs = 1);

TuningTable tuning_curve(const Dataset& decoding_set, const DecoderSpec& family,
                         const std::vector<double>& grid, const SplitPlan& inner_plan,
                         const PreprocessOptions& preprocessing = {}, int jobs = 1);

// Index of the best mean; ties go to the smaller C (lower index).
std::size_t best_grid_index(const std::vector<double>& scores);

// Applies `strategy` given a precomputed grid run (ignored for fixed).
TuningOutcome select(const Dataset& decoding_set, const TuningStrategy& strategy,
                     const DecoderSpec& family, const GridRun* run,
                     const PreprocessOptions& preprocessing);

// Nested CV on the decoding set; the inner plan is drawn with `seed`.
TuningOutcome tune(const Dataset& decoding_set, const TuningStrategy& strategy,
                   const DecoderSpec& family, const PreprocessOptions& preprocessing = {},
                   std::uint64_t seed = 0, int jobs = 1);

nlohmann::json to_json(const TuningTable& table);
nlohmann::json to_json(const TuningOutcome& outcome);

// Runs f(i) for i in [0, n) on up to `jobs` threads. Exceptions are
// rethrown on the caller after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace decodecv

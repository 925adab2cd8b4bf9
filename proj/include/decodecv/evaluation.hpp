#pragma once

#include "decodecv/decoder.hpp"
#include "decodecv/splitters.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace decodecv {

// Fraction of equal entries.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct CvResult {
  double estimate = 0.0;            // mean test accuracy over valid splits
  std::vector<double> per_split;    // NaN for invalid splits
  std::size_t invalid_splits = 0;   // single-class training side
};

// Trains (preprocessing included) on each train side, scores the test side.
CvResult cv_estimate(const Dataset& data, const SplitPlan& plan, const DecoderSpec& spec,
                     const PreprocessOptions& preprocessing = {});

// Linear interpolation between order statistics (inclusive definition:
// position q * (n - 1) in the sorted sample). `sorted` must be ascending.
double percentile(const std::vector<double>& sorted, double q);

struct DiscrepancyStats {
  std::vector<double> deltas;  // cv_estimate - validation_accuracy
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

DiscrepancyStats summarize(std::vector<double> values);
DiscrepancyStats discrepancy(const std::vector<std::pair<double, double>>& records);

struct StabilityResult {
  double value = 0.0;      // mean pairwise Pearson correlation
  bool degenerate = false; // some vector had zero variance (pairs count as 0)
};

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
StabilityResult stability(const std::vector<Eigen::VectorXd>& weight_vectors);

// One row of the tidy results table.
struct ExperimentRecord {
  std::string benchmark;  // "cv" or "tuning"
  std::string dataset;
  std::string task;
  std::size_t validation_split = 0;
  std::string decoder;   // svm / logreg
  std::string penalty;   // l1 / l2
  std::string strategy;  // CV strategy or tuning strategy name
  double cv_estimate = std::numeric_limits<double>::quiet_NaN();
  double validation_accuracy = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double stability = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> chosen_C;
  double runtime = std::numeric_limits<double>::quiet_NaN();
  std::size_t invalid_splits = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
};

const std::vector<std::string>& record_columns();
void write_records_csv(const std::vector<ExperimentRecord>& records, std::ostream& out);
// Throws DataError naming the first missing column.
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

// Accuracy deltas are centred within each (dataset, task, validation split,
// decoder, penalty) group across strategies; stability deltas within each
// (dataset, task, decoder, penalty) group.
struct TradeoffRow {
  std::string decoder;
  std::string penalty;
  std::string strategy;
  std::size_t n = 0;
  double mean_delta_accuracy = 0.0;
  double q25_delta_accuracy = 0.0;
  double q75_delta_accuracy = 0.0;
  double mean_delta_stability = std::numeric_limits<double>::quiet_NaN();
  double q25_delta_stability = std::numeric_limits<double>::quiet_NaN();
  double q75_delta_stability = std::numeric_limits<double>::quiet_NaN();
};

// Per-record accuracy delta (same order as `records`).
std::vector<double> centered_accuracy_deltas(const std::vector<ExperimentRecord>& records);

std::vector<TradeoffRow> tradeoff_summary(const std::vector<ExperimentRecord>& records);

}  // namespace decodecv

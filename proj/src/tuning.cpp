#include "decodecv/tuning.hpp"

#include "decodecv/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace decodecv {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0 || !(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("log grid needs n > 0 and 0 < lo <= hi");
  }
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double rounded = std::round(e);
    // Keep exact powers of ten exact.
    g[i] = std::abs(e - rounded) < 1e-12 ? std::pow(10.0, rounded) : std::pow(10.0, e);
  }
  return g;
}

std::vector<double> default_C_grid() { return log_grid(1e-5, 1e5, 11); }

TuningStrategy TuningStrategy::refit(std::vector<double> grid) {
  TuningStrategy s;
  s.kind = StrategyKind::refit_best;
  s.grid = std::move(grid);
  return s;
}

TuningStrategy TuningStrategy::average(std::vector<double> grid) {
  TuningStrategy s;
  s.kind = StrategyKind::average_best;
  s.grid = std::move(grid);
  return s;
}

TuningStrategy TuningStrategy::fixed(double C) {
  TuningStrategy s;
  s.kind = StrategyKind::fixed;
  s.fixed_C = C;
  s.grid.clear();
  return s;
}

std::string TuningStrategy::name() const {
  switch (kind) {
    case StrategyKind::refit_best:
      return "refit";
    case StrategyKind::average_best:
      return "average";
    case StrategyKind::fixed: {
      std::ostringstream os;
      os << "C=" << fixed_C;
      return os.str();
    }
  }
  return "unknown";
}

void TuningStrategy::validate() const {
  if (kind == StrategyKind::fixed) {
    if (!(fixed_C > 0.0) || !std::isfinite(fixed_C)) {
      throw std::invalid_argument("fixed C must be finite and positive");
    }
    return;
  }
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("grid values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
  inner.validate();
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::size_t TuningTable::n_invalid() const {
  return static_cast<std::size_t>(std::count(split_valid.begin(), split_valid.end(), false));
}

std::vector<double> TuningTable::mean_curve() const {
  std::vector<double> means(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> vals;
    for (std::size_t s = 0; s < n_splits; ++s) {
      if (split_valid[s]) vals.push_back(at(g, s));
    }
    if (!vals.empty()) means[g] = pairwise_sum(vals) / static_cast<double>(vals.size());
  }
  return means;
}

GridRun run_grid(const Dataset& decoding_set, const DecoderSpec& family,
                 const std::vector<double>& grid, const SplitPlan& inner_plan,
                 const PreprocessOptions& preprocessing, int jobs) {
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  inner_plan.validate(decoding_set.n_samples());

  GridRun run;
  run.table.grid = grid;
  run.table.n_splits = inner_plan.size();
  run.table.accuracy.assign(grid.size() * inner_plan.size(),
                            std::numeric_limits<double>::quiet_NaN());
  run.table.split_valid.assign(inner_plan.size(), true);
  run.models.resize(run.table.accuracy.size());

  std::vector<Dataset> trains;
  std::vector<Dataset> tests;
  for (std::size_t s = 0; s < inner_plan.size(); ++s) {
    trains.push_back(decoding_set.subset(inner_plan.splits[s].train));
    tests.push_back(decoding_set.subset(inner_plan.splits[s].test));
    run.table.split_valid[s] = trains.back().has_both_classes();
  }

  parallel_for(run.table.accuracy.size(), jobs, [&](std::size_t cell) {
    const auto g = cell / inner_plan.size();
    const auto s = cell % inner_plan.size();
    if (!run.table.split_valid[s]) return;
    const TrainedModel m = train(trains[s], family.with_C(grid[g]), preprocessing);
    run.table.accuracy[cell] = accuracy(predict(m, tests[s]), tests[s].labels);
    run.models[cell] = m.full_space();
  });
  return run;
}

TuningTable tuning_curve(const Dataset& decoding_set, const DecoderSpec& family,
                         const std::vector<double>& grid, const SplitPlan& inner_plan,
                         const PreprocessOptions& preprocessing, int jobs) {
  return run_grid(decoding_set, family, grid, inner_plan, preprocessing, jobs).table;
}

std::size_t best_grid_index(const std::vector<double>& scores) {
  std::size_t best = scores.size();
  for (std::size_t g = 0; g < scores.size(); ++g) {
    if (std::isnan(scores[g])) continue;
    if (best == scores.size() || scores[g] > scores[best]) best = g;
  }
  if (best == scores.size()) throw std::runtime_error("no valid inner split to tune on");
  return best;
}

TuningOutcome select(const Dataset& decoding_set, const TuningStrategy& strategy,
                     const DecoderSpec& family, const GridRun* run,
                     const PreprocessOptions& preprocessing) {
  strategy.validate();
  TuningOutcome out;
  out.kind = strategy.kind;
  out.cv_estimate = std::numeric_limits<double>::quiet_NaN();

  if (strategy.kind == StrategyKind::fixed) {
    out.trained = train(decoding_set, family.with_C(strategy.fixed_C), preprocessing);
    out.model = out.trained->full_space();
    out.chosen_C = {strategy.fixed_C};
    return out;
  }
  if (run == nullptr) throw std::invalid_argument("tuning strategy needs a grid run");
  out.curve = run->table;
  const auto& table = run->table;

  if (strategy.kind == StrategyKind::refit_best) {
    const auto means = table.mean_curve();
    const auto g = best_grid_index(means);
    out.trained = train(decoding_set, family.with_C(table.grid[g]), preprocessing);
    out.model = out.trained->full_space();
    out.chosen_C = {table.grid[g]};
    out.cv_estimate = means[g];
    return out;
  }

  // average_best: each valid split contributes its own best model.
  const auto d = static_cast<Eigen::Index>(decoding_set.n_features());
  Eigen::VectorXd weight_sum = Eigen::VectorXd::Zero(d);
  double intercept_sum = 0.0;
  std::vector<double> best_scores;
  for (std::size_t s = 0; s < table.n_splits; ++s) {
    if (!table.split_valid[s]) continue;
    std::vector<double> column(table.grid.size());
    for (std::size_t g = 0; g < table.grid.size(); ++g) column[g] = table.at(g, s);
    const auto g = best_grid_index(column);
    const auto& m = run->models[g * table.n_splits + s];
    weight_sum += m.weights;
    intercept_sum += m.intercept;
    out.chosen_C.push_back(table.grid[g]);
    best_scores.push_back(column[g]);
  }
  if (best_scores.empty()) throw std::runtime_error("no valid inner split to tune on");
  const auto k = static_cast<double>(best_scores.size());
  out.model.weights = weight_sum / k;
  out.model.intercept = intercept_sum / k;
  out.cv_estimate = pairwise_sum(best_scores) / k;
  return out;
}

TuningOutcome tune(const Dataset& decoding_set, const TuningStrategy& strategy,
                   const DecoderSpec& family, const PreprocessOptions& preprocessing,
                   std::uint64_t seed, int jobs) {
  strategy.validate();
  if (strategy.kind == StrategyKind::fixed) {
    return select(decoding_set, strategy, family, nullptr, preprocessing);
  }
  const SplitPlan inner = make_plan(decoding_set, strategy.inner, seed);
  const GridRun run = run_grid(decoding_set, family, strategy.grid, inner, preprocessing, jobs);
  return select(decoding_set, strategy, family, &run, preprocessing);
}

nlohmann::json to_json(const TuningTable& table) {
  nlohmann::json j;
  j["grid"] = table.grid;
  j["n_splits"] = table.n_splits;
  j["split_valid"] = table.split_valid;
  auto& rows = j["accuracy"] = nlohmann::json::array();
  for (std::size_t g = 0; g < table.grid.size(); ++g) {
    auto row = nlohmann::json::array();
    for (std::size_t s = 0; s < table.n_splits; ++s) {
      const double a = table.at(g, s);
      row.push_back(std::isnan(a) ? nlohmann::json(nullptr) : nlohmann::json(a));
    }
    rows.push_back(std::move(row));
  }
  auto means = nlohmann::json::array();
  for (double m : table.mean_curve()) {
    means.push_back(std::isnan(m) ? nlohmann::json(nullptr) : nlohmann::json(m));
  }
  j["mean"] = std::move(means);
  return j;
}

nlohmann::json to_json(const TuningOutcome& outcome) {
  nlohmann::json j;
  j["model"] = to_json(outcome.model);
  j["chosen_C"] = outcome.chosen_C;
  j["cv_estimate"] = std::isnan(outcome.cv_estimate) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(outcome.cv_estimate);
  j["tuning_curve"] = outcome.curve.empty() ? nlohmann::json(nullptr) : to_json(outcome.curve);
  if (outcome.trained) j["trained"] = to_json(*outcome.trained);
  return j;
}

}  // namespace decodecv

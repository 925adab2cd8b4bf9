#include "decodecv/evaluation.hpp"

#include "decodecv/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace decodecv {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CvResult cv_estimate(const Dataset& data, const SplitPlan& plan, const DecoderSpec& spec,
                     const PreprocessOptions& preprocessing) {
  plan.validate(data.n_samples());
  CvResult r;
  std::vector<double> valid;
  for (const auto& split : plan.splits) {
    const Dataset train_side = data.subset(split.train);
    if (!train_side.has_both_classes()) {
      r.per_split.push_back(std::numeric_limits<double>::quiet_NaN());
      ++r.invalid_splits;
      continue;
    }
    const Dataset test_side = data.subset(split.test);
    const TrainedModel m = train(train_side, spec, preprocessing);
    const double acc = accuracy(predict(m, test_side), test_side.labels);
    r.per_split.push_back(acc);
    valid.push_back(acc);
  }
  r.estimate = valid.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : pairwise_sum(valid) / static_cast<double>(valid.size());
  return r;
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DiscrepancyStats summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("discrepancy needs at least one record");
  DiscrepancyStats s;
  s.deltas = values;
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.median = percentile(values, 0.5);
  s.q25 = percentile(values, 0.25);
  s.q75 = percentile(values, 0.75);
  s.p5 = percentile(values, 0.05);
  s.p95 = percentile(values, 0.95);
  return s;
}

DiscrepancyStats discrepancy(const std::vector<std::pair<double, double>>& records) {
  std::vector<double> deltas;
  deltas.reserve(records.size());
  for (const auto& [cv, val] : records) deltas.push_back(cv - val);
  return summarize(std::move(deltas));
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  const double na = std::sqrt((ca * ca).sum());
  const double nb = std::sqrt((cb * cb).sum());
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp((ca * cb).sum() / (na * nb), -1.0, 1.0);
}

StabilityResult stability(const std::vector<Eigen::VectorXd>& vs) {
  if (vs.size() < 2) throw std::invalid_argument("stability needs at least 2 vectors");
  for (const auto& v : vs) {
    if (v.size() != vs.front().size()) {
      throw std::invalid_argument("stability: vectors differ in length");
    }
  }
  StabilityResult r;
  std::vector<double> corr;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      double c = pearson(vs[i], vs[j]);
      if (std::isnan(c)) {
        c = 0.0;
        r.degenerate = true;
      }
      corr.push_back(c);
    }
  }
  r.value = pairwise_sum(corr) / static_cast<double>(corr.size());
  return r;
}

std::vector<double> centered_accuracy_deltas(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::size_t, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  const auto key = [](const ExperimentRecord& r) {
    return Key{r.dataset, r.task, r.validation_split, r.decoder, r.penalty};
  };
  for (const auto& r : records) groups[key(r)].push_back(r.validation_accuracy);
  std::map<Key, double> means;
  for (const auto& [k, v] : groups) means[k] = pairwise_sum(v) / static_cast<double>(v.size());
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.validation_accuracy - means[key(r)]);
  return out;
}

std::vector<TradeoffRow> tradeoff_summary(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("tradeoff summary of an empty table");
  const auto acc_deltas = centered_accuracy_deltas(records);

  // Stability is one value per (dataset, task, decoder, penalty, strategy).
  using TaskKey = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<std::pair<TaskKey, std::string>, double> stab;
  for (const auto& r : records) {
    if (std::isnan(r.stability)) continue;
    stab.emplace(std::pair{TaskKey{r.dataset, r.task, r.decoder, r.penalty}, r.strategy},
                 r.stability);
  }
  std::map<TaskKey, std::vector<double>> stab_groups;
  for (const auto& [k, v] : stab) stab_groups[k.first].push_back(v);

  using RowKey = std::tuple<std::string, std::string, std::string>;
  std::map<RowKey, std::vector<double>> acc_by_row;
  std::map<RowKey, std::vector<double>> stab_by_row;
  std::vector<RowKey> order;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const RowKey rk{r.decoder, r.penalty, r.strategy};
    if (!acc_by_row.count(rk)) order.push_back(rk);
    acc_by_row[rk].push_back(acc_deltas[i]);
  }
  for (const auto& [k, v] : stab) {
    const auto& group = stab_groups[k.first];
    const double mean = pairwise_sum(group) / static_cast<double>(group.size());
    const auto& [dataset, task, decoder, penalty] = k.first;
    stab_by_row[RowKey{decoder, penalty, k.second}].push_back(v - mean);
  }

  std::vector<TradeoffRow> rows;
  for (const auto& rk : order) {
    TradeoffRow row;
    std::tie(row.decoder, row.penalty, row.strategy) = rk;
    const auto acc = summarize(acc_by_row[rk]);
    row.n = acc.deltas.size();
    row.mean_delta_accuracy = acc.mean;
    row.q25_delta_accuracy = acc.q25;
    row.q75_delta_accuracy = acc.q75;
    if (auto it = stab_by_row.find(rk); it != stab_by_row.end()) {
      const auto st = summarize(it->second);
      row.mean_delta_stability = st.mean;
      row.q25_delta_stability = st.q25;
      row.q75_delta_stability = st.q75;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace decodecv

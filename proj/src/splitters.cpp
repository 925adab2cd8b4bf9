#include "decodecv/splitters.hpp"

#include "decodecv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace decodecv {

namespace {

Split split_by_test_blocks(const Dataset& data, const std::set<int>& test_blocks) {
  Split s;
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    (test_blocks.count(data.blocks[i]) ? s.test : s.train).push_back(i);
  }
  return s;
}

double positive_rate(const Dataset& data, const IndexList& idx) {
  std::size_t pos = 0;
  for (auto i : idx) pos += data.labels[i] == 1 ? 1 : 0;
  return idx.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(idx.size());
}

SplitPlan random_block_plan(const Dataset& data, std::size_t n_splits,
                            double fraction, std::uint64_t seed, bool stratify,
                            std::string name) {
  if (n_splits == 0) throw std::invalid_argument("n_splits must be positive");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("held-out fraction must lie in (0, 1)");
  }
  const auto order = data.block_order();
  if (order.size() < 2) {
    throw std::invalid_argument("block-wise CV requires >= 2 blocks");
  }
  const auto n_test = held_out_block_count(order.size(), fraction);
  const double overall_rate = positive_rate(data, [&] {
    IndexList all(data.n_samples());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }());

  Rng rng(seed);
  auto draw = [&] {
    std::vector<int> blocks = order;
    // Partial Fisher-Yates: the first n_test positions are the sample.
    for (std::size_t i = 0; i < n_test; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(blocks.size() - i));
      std::swap(blocks[i], blocks[j]);
    }
    return split_by_test_blocks(
        data, std::set<int>(blocks.begin(), blocks.begin() + static_cast<long>(n_test)));
  };

  SplitPlan plan{std::move(name), seed, {}};
  for (std::size_t s = 0; s < n_splits; ++s) {
    Split split = draw();
    if (stratify) {
      double best_gap = std::abs(positive_rate(data, split.test) - overall_rate);
      for (int attempt = 1; attempt < 1000 && best_gap > 0.05; ++attempt) {
        Split candidate = draw();
        const double gap = std::abs(positive_rate(data, candidate.test) - overall_rate);
        if (gap < best_gap) {
          best_gap = gap;
          split = std::move(candidate);
        }
      }
    }
    plan.splits.push_back(std::move(split));
  }
  return plan;
}

}  // namespace

void SplitPlan::validate(std::size_t n_samples, const std::vector<int>* blocks) const {
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const auto& sp = splits[s];
    const auto where = "split " + std::to_string(s) + ": ";
    if (sp.train.empty() || sp.test.empty()) {
      throw std::logic_error(where + "empty train or test side");
    }
    std::vector<char> side(n_samples, 0);
    for (auto i : sp.train) {
      if (i >= n_samples) throw std::logic_error(where + "index out of bounds");
      side[i] = 1;
    }
    for (auto i : sp.test) {
      if (i >= n_samples) throw std::logic_error(where + "index out of bounds");
      if (side[i] == 1) throw std::logic_error(where + "train and test overlap");
      side[i] = 2;
    }
    if (blocks != nullptr) {
      std::set<int> train_blocks;
      for (auto i : sp.train) train_blocks.insert((*blocks)[i]);
      for (auto i : sp.test) {
        if (train_blocks.count((*blocks)[i])) {
          throw std::logic_error(where + "block on both sides");
        }
      }
    }
  }
}

SplitPlan leave_one_sample_out(const Dataset& data) {
  const auto n = data.n_samples();
  if (n < 2) throw std::invalid_argument("leave-one-sample-out needs >= 2 samples");
  SplitPlan plan{"loo_sample", std::nullopt, {}};
  plan.splits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Split s;
    s.test = {i};
    s.train.reserve(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) s.train.push_back(k);
    }
    plan.splits.push_back(std::move(s));
  }
  return plan;
}

SplitPlan leave_one_block_out(const Dataset& data) {
  const auto order = data.block_order();
  if (order.size() < 2) {
    throw std::invalid_argument("block-wise CV requires >= 2 blocks");
  }
  SplitPlan plan{"loo_block", std::nullopt, {}};
  for (int b : order) plan.splits.push_back(split_by_test_blocks(data, {b}));
  return plan;
}

std::size_t held_out_block_count(std::size_t n_blocks, double fraction) {
  const auto k = std::max<long>(1, std::lround(fraction * static_cast<double>(n_blocks)));
  if (static_cast<std::size_t>(k) >= n_blocks) {
    throw std::invalid_argument("holding out " + std::to_string(k) + " of " +
                                std::to_string(n_blocks) +
                                " blocks leaves no training blocks");
  }
  return static_cast<std::size_t>(k);
}

SplitPlan shuffled_block_split(const Dataset& data, std::size_t n_splits,
                               double test_fraction, std::uint64_t seed,
                               bool stratify) {
  return random_block_plan(data, n_splits, test_fraction, seed, stratify,
                           "shuffle_" + std::to_string(n_splits));
}

SplitPlan validation_split(const Dataset& data, std::size_t n_repeats,
                           double validation_fraction, std::uint64_t seed,
                           bool stratify) {
  return random_block_plan(data, n_repeats, validation_fraction, seed, stratify,
                           "validation");
}

std::string SplitterSpec::name() const {
  switch (kind) {
    case SplitterKind::leave_one_sample_out:
      return "loo_sample";
    case SplitterKind::leave_one_block_out:
      return "loo_block";
    case SplitterKind::shuffled_block:
      return "shuffle_" + std::to_string(n_splits);
  }
  return "unknown";
}

void SplitterSpec::validate() const {
  if (kind == SplitterKind::shuffled_block) {
    if (n_splits == 0) throw std::invalid_argument("n_splits must be positive");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw std::invalid_argument("test_fraction must lie in (0, 1)");
    }
  }
}

SplitPlan make_plan(const Dataset& data, const SplitterSpec& spec, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case SplitterKind::leave_one_sample_out:
      return leave_one_sample_out(data);
    case SplitterKind::leave_one_block_out:
      return leave_one_block_out(data);
    case SplitterKind::shuffled_block:
      return shuffled_block_split(data, spec.n_splits, spec.test_fraction, seed,
                                  spec.stratify);
  }
  throw std::logic_error("unhandled splitter kind");
}

nlohmann::json to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["strategy"] = plan.strategy;
  j["seed"] = plan.seed ? nlohmann::json(*plan.seed) : nlohmann::json(nullptr);
  auto& splits = j["splits"] = nlohmann::json::array();
  for (const auto& s : plan.splits) {
    splits.push_back({{"train", s.train}, {"test", s.test}});
  }
  return j;
}

SplitPlan split_plan_from_json(const nlohmann::json& j) {
  SplitPlan plan;
  plan.strategy = j.at("strategy").get<std::string>();
  if (!j.at("seed").is_null()) plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("splits")) {
    plan.splits.push_back({s.at("train").get<IndexList>(), s.at("test").get<IndexList>()});
  }
  return plan;
}

}  // namespace decodecv

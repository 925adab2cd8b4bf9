#pragma once

#include "decodecv/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace decodecv {

struct Split {
  IndexList train;  // ascending
  IndexList test;   // ascending

  bool operator==(const Split&) const = default;
};

struct SplitPlan {
  std::string strategy;
  std::optional<std::uint64_t> seed;
  std::vector<Split> splits;

  std::size_t size() const { return splits.size(); }

  // Disjoint, nonempty, in-bounds; with `blocks`, also block integrity.
  void validate(std::size_t n_samples,
                const std::vector<int>* blocks = nullptr) const;

  bool operator==(const SplitPlan&) const = default;
};

SplitPlan leave_one_sample_out(const Dataset& data);
SplitPlan leave_one_block_out(const Dataset& data);

// Number of whole blocks placed on the held-out side:
// max(1, round(fraction * n_blocks)); throws if nothing would remain for
// training.
std::size_t held_out_block_count(std::size_t n_blocks, double fraction);

// Repeated random block splits. With `stratify`, each draw is resampled
// (at most 1000 times) until the test-side positive rate is within 0.05 of
// the dataset's; the closest draw is kept if none qualifies.
SplitPlan shuffled_block_split(const Dataset& data, std::size_t n_splits,
                               double test_fraction, std::uint64_t seed,
                               bool stratify = false);

// Outer loop: `test` holds the validation blocks, `train` is the decoding
// set handed to nested cross-validation.
SplitPlan validation_split(const Dataset& data, std::size_t n_repeats = 10,
                           double validation_fraction = 0.5,
                           std::uint64_t seed = 0, bool stratify = false);

enum class SplitterKind { leave_one_sample_out, leave_one_block_out, shuffled_block };

// Declarative description of a splitting strategy.
struct SplitterSpec {
  SplitterKind kind = SplitterKind::shuffled_block;
  std::size_t n_splits = 10;
  double test_fraction = 0.2;
  bool stratify = false;

  // Stable identifier: loo_sample, loo_block, shuffle_<n>.
  std::string name() const;
  void validate() const;
};

SplitPlan make_plan(const Dataset& data, const SplitterSpec& spec,
                    std::uint64_t seed);

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& j);

}  // namespace decodecv

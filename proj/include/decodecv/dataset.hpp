#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decodecv {

using IndexList = std::vector<std::size_t>;

// Raised for malformed input data (CSV content, shape mismatches).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sample matrix with binary labels and block (session/subject) identifiers.
//
// Labels are stored as -1/+1. `label_names` keeps the original values so
// that an import/export cycle is lossless: label_names[0] is the value
// mapped to -1, label_names[1] the value mapped to +1. Blocks are dense
// integer ids indexing `block_names`.
struct Dataset {
  Eigen::MatrixXd features;  // n_samples x n_features
  std::vector<int> labels;
  std::vector<int> blocks;
  std::vector<std::string> block_names;
  std::array<std::string, 2> label_names{"-1", "1"};
  std::string name;

  std::size_t n_samples() const { return labels.size(); }
  std::size_t n_features() const {
    return static_cast<std::size_t>(features.cols());
  }

  // Distinct block ids in order of first occurrence.
  std::vector<int> block_order() const;
  std::size_t n_blocks() const { return block_order().size(); }

  std::size_t n_positive() const;
  std::size_t n_negative() const { return n_samples() - n_positive(); }
  bool has_both_classes() const {
    return n_positive() > 0 && n_negative() > 0;
  }

  // Checks the full-dataset invariants (shape agreement, >= 2 samples,
  // labels in {-1,+1} with both present, valid block ids).
  void validate() const;

  // Rows at `indices`, in the given order. Block ids and names are kept.
  Dataset subset(std::span<const std::size_t> indices) const;
};

// Builds a dataset from +-1 labels and integer block ids (block names are
// the decimal ids).
Dataset make_dataset(Eigen::MatrixXd features, std::vector<int> labels,
                     std::vector<int> blocks, std::string name = {});

// CSV with header f0..f{d-1},label,block (column order free). Labels may be
// any two distinct strings; they are mapped to -1/+1 by ascending lexical
// order.
Dataset read_csv(std::istream& in, std::string name = {});
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace decodecv

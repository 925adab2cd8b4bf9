#pragma once

#include "decodecv/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace decodecv {

// How class labels are laid out in time inside each block.
enum class LabelLayout {
  runs,          // one contiguous run per class in every block
  mirrored_runs, // as runs, but every other block is reversed (+- | -+ | +-)
  alternating,  // labels alternate sample by sample
  shuffled      // balanced labels in random order inside each block
};

std::string to_string(LabelLayout layout);
LabelLayout label_layout_from_string(const std::string& text);

// Two isotropic Gaussian classes centred on (+mu,...,+mu) and
// (-mu,...,-mu), with noise smoothed along the sample axis.
struct SimulationConfig {
  double mu = 0.1;
  std::size_t n_features = 100;
  std::size_t n_train = 200;
  std::size_t n_test = 10000;
  double smoothing_sigma = 2.0;
  std::size_t n_blocks = 10;
  std::uint64_t seed = 0;
  bool rescale_noise = true;  // restore unit marginal variance after smoothing
  LabelLayout label_layout = LabelLayout::runs;
  // Samples per run for the runs layout; 0 means one run per class per block.
  std::size_t run_length = 0;
  // Smooth each training block on its own, so no noise is shared across
  // blocks. The test stream is always smoothed as one series.
  bool independent_blocks = true;

  void validate() const;
  std::size_t block_size() const { return n_train / n_blocks; }
};

struct SimulatedData {
  Dataset train;
  Dataset test;
};

// Gaussian kernel truncated at +-4 sigma, normalized to sum 1.
std::vector<double> gaussian_kernel(double sigma);

// Convolves every column with `kernel` (odd length, centred) using
// reflected boundaries (d c b a | a b c d | d c b a).
Eigen::MatrixXd smooth_columns(const Eigen::MatrixXd& x,
                               const std::vector<double>& kernel);

// Labels for `n` samples laid out in chunks of `block_size`; chunk k is
// block k. Every chunk of size >= 2 holds both classes and the overall
// class counts differ by at most one.
std::vector<int> simulated_labels(std::size_t n, std::size_t block_size,
                                  LabelLayout layout, std::size_t run_length = 0,
                                  std::uint64_t seed = 0);

SimulatedData generate(const SimulationConfig& config);

// Unit vector (1,...,1)/sqrt(d): the optimal discriminant direction.
Eigen::VectorXd bayes_direction(const SimulationConfig& config);

}  // namespace decodecv

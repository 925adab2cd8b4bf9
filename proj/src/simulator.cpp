#include "decodecv/simulator.hpp"

#include "decodecv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace decodecv {

std::string to_string(LabelLayout layout) {
  switch (layout) {
    case LabelLayout::runs:
      return "runs";
    case LabelLayout::mirrored_runs:
      return "mirrored_runs";
    case LabelLayout::alternating:
      return "alternating";
    case LabelLayout::shuffled:
      return "shuffled";
  }
  return "unknown";
}

LabelLayout label_layout_from_string(const std::string& text) {
  if (text == "runs") return LabelLayout::runs;
  if (text == "mirrored_runs") return LabelLayout::mirrored_runs;
  if (text == "alternating") return LabelLayout::alternating;
  if (text == "shuffled") return LabelLayout::shuffled;
  throw std::invalid_argument("unknown label layout '" + text + "'");
}

void SimulationConfig::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("mu must be a finite value >= 0");
  }
  if (n_features == 0 || n_train == 0 || n_test == 0 || n_blocks == 0) {
    throw std::invalid_argument("sizes must be positive");
  }
  if (!(smoothing_sigma > 0.0)) {
    throw std::invalid_argument("smoothing_sigma must be > 0");
  }
  if (n_train % n_blocks != 0) {
    throw std::invalid_argument("n_train (" + std::to_string(n_train) +
                                ") is not divisible into " +
                                std::to_string(n_blocks) + " equal blocks");
  }
  if (n_train < 2 || n_test < 2) {
    throw std::invalid_argument("train and test sets need >= 2 samples");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<int>(4.0 * sigma + 0.5);
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

namespace {

// Index into [0, n) under reflection about the half-sample boundaries.
Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

Eigen::MatrixXd smooth_columns(const Eigen::MatrixXd& x,
                               const std::vector<double>& kernel) {
  const auto n = x.rows();
  const auto radius = static_cast<Eigen::Index>(kernel.size() / 2);
  Eigen::MatrixXd out(n, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index t = -radius; t <= radius; ++t) {
        acc += kernel[static_cast<std::size_t>(t + radius)] * x(reflect(i + t, n), j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<int> simulated_labels(std::size_t n, std::size_t block_size,
                                  LabelLayout layout, std::size_t run_length,
                                  std::uint64_t seed) {
  std::vector<int> labels(n);
  for (std::size_t start = 0, k = 0; start < n; start += block_size, ++k) {
    const std::size_t size = std::min(block_size, n - start);
    // Odd-sized chunks alternate which class receives the extra sample.
    const bool extra_positive = (k % 2 == 0);
    const std::size_t n_pos = size / 2 + ((size % 2 == 1 && extra_positive) ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      int y = 0;
      if (layout == LabelLayout::runs && run_length > 0 && run_length < size) {
        y = (i / run_length) % 2 == 0 ? 1 : -1;
      } else if (layout == LabelLayout::runs || layout == LabelLayout::shuffled) {
        y = i < n_pos ? 1 : -1;
      } else if (layout == LabelLayout::mirrored_runs) {
        // Odd chunks start with the class the previous chunk ended on.
        const bool first = i < (k % 2 == 0 ? n_pos : size - n_pos);
        y = (first == (k % 2 == 0)) ? 1 : -1;
      } else {
        y = ((i + k) % 2 == 0) ? 1 : -1;
      }
      labels[start + i] = y;
    }
    if (layout == LabelLayout::shuffled) {
      Rng rng(derive_seed(seed, {k}));
      rng.shuffle(std::span<int>(labels.data() + start, size));
    }
  }
  return labels;
}

namespace {

Dataset simulate_part(const SimulationConfig& config, std::size_t n,
                      std::uint64_t stream_seed, const std::string& name,
                      bool blockwise_noise) {
  Rng rng(stream_seed);
  const auto d = static_cast<Eigen::Index>(config.n_features);
  Eigen::MatrixXd noise(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < noise.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) noise(i, j) = rng.normal();
  }
  const auto kernel = gaussian_kernel(config.smoothing_sigma);
  const std::size_t block = config.block_size();
  if (config.independent_blocks && blockwise_noise) {
    for (std::size_t start = 0; start < n; start += block) {
      const auto len = static_cast<Eigen::Index>(std::min(block, n - start));
      const auto first = static_cast<Eigen::Index>(start);
      noise.middleRows(first, len) = smooth_columns(noise.middleRows(first, len), kernel);
    }
  } else {
    noise = smooth_columns(noise, kernel);
  }
  if (config.rescale_noise) {
    double energy = 0.0;
    for (double w : kernel) energy += w * w;
    noise /= std::sqrt(energy);
  }

  Dataset data;
  data.labels = simulated_labels(n, block, config.label_layout, config.run_length,
                                 derive_seed(stream_seed, {7}));
  data.features = std::move(noise);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = data.labels[i] * config.mu;
    data.features.row(static_cast<Eigen::Index>(i)).array() += shift;
    data.blocks.push_back(static_cast<int>(i / block));
  }
  const std::size_t n_chunks = (n + block - 1) / block;
  for (std::size_t b = 0; b < n_chunks; ++b) data.block_names.push_back(std::to_string(b));
  data.name = name;
  return data;
}

}  // namespace

SimulatedData generate(const SimulationConfig& config) {
  config.validate();
  SimulatedData out;
  out.train = simulate_part(config, config.n_train, derive_seed(config.seed, {1}),
                            "simulation_train", true);
  out.test = simulate_part(config, config.n_test, derive_seed(config.seed, {2}),
                           "simulation_test", false);
  return out;
}

Eigen::VectorXd bayes_direction(const SimulationConfig& config) {
  if (!(config.mu > 0.0)) throw std::invalid_argument("no discriminative direction");
  const auto d = static_cast<Eigen::Index>(config.n_features);
  return Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

}  // namespace decodecv

#include "decodecv/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace decodecv {

void PreprocessOptions::validate() const {
  if (!(screen_fraction > 0.0 && screen_fraction <= 1.0)) {
    throw std::invalid_argument("screen_fraction must lie in (0, 1]");
  }
}

std::size_t Preprocessor::n_selected() const {
  return static_cast<std::size_t>(
      std::count(selected.begin(), selected.end(), true));
}

IndexList Preprocessor::selected_indices() const {
  IndexList idx;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    if (selected[j]) idx.push_back(j);
  }
  return idx;
}

bool Preprocessor::any_zero_variance() const {
  return std::find(zero_variance.begin(), zero_variance.end(), true) !=
         zero_variance.end();
}

Preprocessor Preprocessor::identity(std::size_t n_features) {
  Preprocessor p;
  p.scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_features));
  p.selected.assign(n_features, true);
  p.zero_variance.assign(n_features, false);
  return p;
}

Eigen::MatrixXd Preprocessor::transform(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_input()) {
    throw DataError("preprocessor expects " + std::to_string(n_input()) +
                    " features, got " + std::to_string(x.cols()));
  }
  const auto keep = selected_indices();
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(keep[k]);
    out.col(static_cast<Eigen::Index>(k)) = x.col(j) / scale(j);
  }
  return out;
}

Eigen::VectorXd column_std(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::VectorXd sd(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double ss = (x.col(j).array() - mean).square().sum();
    sd(j) = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  return sd;
}

Eigen::VectorXd f_scores(const Dataset& train) {
  const auto n = static_cast<Eigen::Index>(train.n_samples());
  const auto d = train.features.cols();
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (int y : train.labels) (y == 1 ? n_pos : n_neg) += 1.0;
  const double dof = std::max<double>(static_cast<double>(n) - 2.0, 1.0);

  Eigen::VectorXd scores(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum_pos = 0.0;
    double sum_neg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      (train.labels[static_cast<std::size_t>(i)] == 1 ? sum_pos : sum_neg) +=
          train.features(i, j);
    }
    const double mean_pos = sum_pos / n_pos;
    const double mean_neg = sum_neg / n_neg;
    const double mean = (sum_pos + sum_neg) / static_cast<double>(n);
    double within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m =
          train.labels[static_cast<std::size_t>(i)] == 1 ? mean_pos : mean_neg;
      const double r = train.features(i, j) - m;
      within += r * r;
    }
    const double between = n_pos * (mean_pos - mean) * (mean_pos - mean) +
                           n_neg * (mean_neg - mean) * (mean_neg - mean);
    if (within > 0.0) {
      scores(j) = between / (within / dof);
    } else {
      scores(j) = between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
  }
  return scores;
}

std::size_t screen_count(std::size_t n_features, double fraction) {
  // The small offset keeps products such as 0.2 * 100 from rounding up.
  const double raw = fraction * static_cast<double>(n_features) - 1e-9;
  const auto k = static_cast<std::size_t>(std::ceil(raw));
  return std::clamp<std::size_t>(k, 1, n_features);
}

std::pair<Preprocessor, Dataset> variance_normalize(const Dataset& train) {
  if (train.n_samples() < 2) {
    throw DataError("variance normalization needs at least 2 samples");
  }
  Preprocessor p = Preprocessor::identity(train.n_features());
  const Eigen::VectorXd sd = column_std(train.features);
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (sd(j) > 0.0) {
      p.scale(j) = sd(j);
    } else {
      p.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  Dataset out = train;
  out.features = p.transform(train.features);
  return {std::move(p), std::move(out)};
}

Preprocessor univariate_screen(const Dataset& train, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("screening fraction must lie in (0, 1]");
  }
  if (!train.has_both_classes()) {
    throw DataError("screening requires two classes");
  }
  const auto d = train.n_features();
  Preprocessor p = Preprocessor::identity(d);
  p.screen_fraction = fraction;
  const auto keep = screen_count(d, fraction);
  if (keep == d) return p;

  const Eigen::VectorXd scores = f_scores(train);
  IndexList order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  p.selected.assign(d, false);
  for (std::size_t k = 0; k < keep; ++k) p.selected[order[k]] = true;
  return p;
}

Preprocessor fit_preprocessor(const Dataset& train,
                              const PreprocessOptions& options) {
  options.validate();
  Preprocessor p = Preprocessor::identity(train.n_features());
  if (options.normalize) p = variance_normalize(train).first;
  if (options.screen_fraction < 1.0) {
    // F-scores are invariant to per-feature scaling, so the raw data ranks
    // features exactly as the normalized data would.
    const Preprocessor screen = univariate_screen(train, options.screen_fraction);
    p.selected = screen.selected;
    p.screen_fraction = options.screen_fraction;
  }
  return p;
}

Dataset apply_preprocessor(const Preprocessor& p, const Dataset& data) {
  Dataset out = data;
  out.features = p.transform(data.features);
  return out;
}

}  // namespace decodecv

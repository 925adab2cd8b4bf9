#pragma once

#include "decodecv/dataset.hpp"

#include <utility>

namespace decodecv {

struct PreprocessOptions {
  bool normalize = false;       // divide features by their train std
  double screen_fraction = 1.0; // keep ceil(fraction * d) strongest features

  void validate() const;
};

// Train-fitted feature transform: divide by `scale`, then keep `selected`.
struct Preprocessor {
  Eigen::VectorXd scale;            // one divisor per input feature
  std::vector<bool> selected;       // retained input features
  std::vector<bool> zero_variance;  // columns left unscaled (std == 0)
  double screen_fraction = 1.0;

  std::size_t n_input() const { return selected.size(); }
  std::size_t n_selected() const;
  IndexList selected_indices() const;
  bool any_zero_variance() const;

  static Preprocessor identity(std::size_t n_features);

  // Transformed copy of `x` (n x n_input) with n_selected columns.
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;

  bool operator==(const Preprocessor&) const = default;
};

// Sample standard deviation (n-1 denominator) per column.
Eigen::VectorXd column_std(const Eigen::MatrixXd& x);

// Two-sample F statistic per feature (between-class over pooled
// within-class variance). A feature with zero within-class variance and
// distinct class means scores +infinity; a constant feature scores 0.
Eigen::VectorXd f_scores(const Dataset& train);

// Number of features kept for a screening fraction.
std::size_t screen_count(std::size_t n_features, double fraction);

std::pair<Preprocessor, Dataset> variance_normalize(const Dataset& train);

// Screening only (all divisors 1). Ties in score keep the lower index.
Preprocessor univariate_screen(const Dataset& train, double fraction);

// Normalization (if enabled) followed by screening, all on `train`.
Preprocessor fit_preprocessor(const Dataset& train,
                              const PreprocessOptions& options);

Dataset apply_preprocessor(const Preprocessor& p, const Dataset& data);

}  // namespace decodecv

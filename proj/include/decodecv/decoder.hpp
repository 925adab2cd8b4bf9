#pragma once

#include "decodecv/dataset.hpp"
#include "decodecv/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace decodecv {

enum class Loss { hinge, logistic };
enum class Penalty { l1, l2 };

std::string to_string(Loss loss);
std::string to_string(Penalty penalty);
Loss loss_from_string(const std::string& text);
Penalty penalty_from_string(const std::string& text);

double hinge_loss(double margin);
// log(1 + exp(-margin)) without overflow for large |margin|.
double logistic_loss(double margin);

// Regularized linear classifier: minimizes
//   mean_i loss(y_i (x_i . w + b)) + (1 / C) * penalty(w)
// where penalty is ||w||_1 or ||w||_2^2 and the intercept b is not penalized.
struct DecoderSpec {
  Loss loss = Loss::hinge;
  Penalty penalty = Penalty::l2;
  double C = 1.0;
  double tol = 1e-7;
  int max_iter = 5000;
  bool fit_intercept = true;

  void validate() const;
  DecoderSpec with_C(double c) const {
    DecoderSpec s = *this;
    s.C = c;
    return s;
  }
  // "svm_l2", "logreg_l1", ...
  std::string name() const;
  std::string decoder_name() const { return loss == Loss::hinge ? "svm" : "logreg"; }
};

// A plain linear function on raw (unpreprocessed) features.
struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;

  Eigen::VectorXd decision_function(const Eigen::MatrixXd& x) const;
};

struct TrainedModel {
  Eigen::VectorXd weights;  // over the preprocessor's retained features
  double intercept = 0.0;
  Preprocessor preprocessor;
  DecoderSpec spec;
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;

  // Same decision function expressed on raw features: scaling folded into
  // the weights, unselected features set to zero.
  LinearModel full_space() const;
};

// Objective on already-preprocessed features.
double objective(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                 const DecoderSpec& spec, const Eigen::VectorXd& weights,
                 double intercept);

double penalty_value(Penalty penalty, const Eigen::VectorXd& weights);

// Gradient of the smooth part of a logistic objective (mean loss, plus the
// l2 penalty when spec.penalty is l2) with respect to (weights, intercept).
// The last entry is the intercept derivative.
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  const DecoderSpec& spec, const Eigen::VectorXd& weights,
                                  double intercept);

// Fits the preprocessor on `data` (identity by default), then the decoder.
TrainedModel train(const Dataset& data, const DecoderSpec& spec,
                   const PreprocessOptions& preprocessing = {});

Eigen::VectorXd decision_function(const TrainedModel& model, const Dataset& data);
Eigen::VectorXd decision_function(const LinearModel& model, const Dataset& data);

// Sign of the decision values; zero maps to +1.
std::vector<int> predict(const Eigen::VectorXd& decision_values);
std::vector<int> predict(const TrainedModel& model, const Dataset& data);
std::vector<int> predict(const LinearModel& model, const Dataset& data);

// Largest C for which the l1-penalized solution is identically zero: the
// weights vanish iff C <= 1 / max_j |d/dw_j mean-loss| at w = 0 with the
// intercept at its optimum. For the hinge loss this closed form needs
// balanced classes (or no intercept); otherwise it throws.
double l1_critical_C(const Dataset& preprocessed, Loss loss, bool fit_intercept = true);

nlohmann::json to_json(const DecoderSpec& spec);
DecoderSpec decoder_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Preprocessor& p);
Preprocessor preprocessor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LinearModel& model);

}  // namespace decodecv

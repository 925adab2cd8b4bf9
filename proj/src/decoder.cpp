#include "decodecv/decoder.hpp"

#include "solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace decodecv {

void DecoderSpec::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw std::invalid_argument("C must be finite and positive");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
}

std::string DecoderSpec::name() const {
  return decoder_name() + "_" + to_string(penalty);
}

Eigen::VectorXd LinearModel::decision_function(const Eigen::MatrixXd& x) const {
  if (x.cols() != weights.size()) {
    throw DataError("model expects " + std::to_string(weights.size()) +
                    " features, got " + std::to_string(x.cols()));
  }
  return (x * weights).array() + intercept;
}

LinearModel TrainedModel::full_space() const {
  LinearModel m;
  m.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(preprocessor.n_input()));
  const auto keep = preprocessor.selected_indices();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(keep[k]);
    m.weights(j) = weights(static_cast<Eigen::Index>(k)) / preprocessor.scale(j);
  }
  m.intercept = intercept;
  return m;
}

double penalty_value(Penalty penalty, const Eigen::VectorXd& weights) {
  return penalty == Penalty::l1 ? weights.lpNorm<1>() : weights.squaredNorm();
}

double objective(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                 const DecoderSpec& spec, const Eigen::VectorXd& weights,
                 double intercept) {
  const Eigen::VectorXd scores = (x * weights).array() + intercept;
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double m = labels[static_cast<std::size_t>(i)] * scores(i);
    total += spec.loss == Loss::hinge ? hinge_loss(m) : logistic_loss(m);
  }
  return total / static_cast<double>(scores.size()) +
         penalty_value(spec.penalty, weights) / spec.C;
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  const DecoderSpec& spec, const Eigen::VectorXd& weights,
                                  double intercept) {
  if (spec.loss != Loss::logistic) throw std::invalid_argument("gradient needs the logistic loss");
  const auto n = x.rows();
  const auto d = x.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
  const Eigen::VectorXd scores = (x * weights).array() + intercept;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = labels[static_cast<std::size_t>(i)];
    const double m = y * scores(i);
    // d/dm log(1 + exp(-m)) = -1 / (1 + exp(m))
    const double dm = m > 0 ? -std::exp(-m) / (1.0 + std::exp(-m)) : -1.0 / (1.0 + std::exp(m));
    g.head(d) += dm * y * x.row(i).transpose();
    g(d) += dm * y;
  }
  g /= static_cast<double>(n);
  if (spec.penalty == Penalty::l2) g.head(d) += 2.0 / spec.C * weights;
  return g;
}

TrainedModel train(const Dataset& data, const DecoderSpec& spec,
                   const PreprocessOptions& preprocessing) {
  spec.validate();
  if (static_cast<std::size_t>(data.features.rows()) != data.n_samples() ||
      data.blocks.size() != data.n_samples()) {
    throw DataError("features, labels and blocks must have the same length");
  }
  if (!data.has_both_classes()) {
    throw DataError("training requires samples of both classes");
  }
  if (!data.features.allFinite()) {
    throw DataError("training data contains non-finite feature values");
  }

  TrainedModel model;
  model.spec = spec;
  model.preprocessor = fit_preprocessor(data, preprocessing);
  const Eigen::MatrixXd x = model.preprocessor.transform(data.features);

  const auto problem = detail::make_problem(x, data.labels, 1.0 / spec.C, spec.fit_intercept);
  detail::Solution sol;
  if (spec.loss == Loss::logistic) {
    sol = spec.penalty == Penalty::l2
              ? detail::solve_logistic_l2(problem, spec.tol, spec.max_iter)
              : detail::solve_logistic_l1(problem, spec.tol, spec.max_iter);
  } else {
    sol = detail::solve_hinge(problem, spec.penalty, spec.tol, spec.max_iter);
  }
  model.weights = sol.u.head(x.cols());
  model.intercept = spec.fit_intercept ? sol.u(x.cols()) : 0.0;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  model.objective_value = objective(x, data.labels, spec, model.weights, model.intercept);
  return model;
}

Eigen::VectorXd decision_function(const TrainedModel& model, const Dataset& data) {
  const Eigen::MatrixXd x = model.preprocessor.transform(data.features);
  return (x * model.weights).array() + model.intercept;
}

Eigen::VectorXd decision_function(const LinearModel& model, const Dataset& data) {
  return model.decision_function(data.features);
}

std::vector<int> predict(const Eigen::VectorXd& decision_values) {
  std::vector<int> out(static_cast<std::size_t>(decision_values.size()));
  for (Eigen::Index i = 0; i < decision_values.size(); ++i) {
    out[static_cast<std::size_t>(i)] = decision_values(i) >= 0.0 ? 1 : -1;
  }
  return out;
}

std::vector<int> predict(const TrainedModel& model, const Dataset& data) {
  return predict(decision_function(model, data));
}

std::vector<int> predict(const LinearModel& model, const Dataset& data) {
  return predict(decision_function(model, data));
}

double l1_critical_C(const Dataset& data, Loss loss, bool fit_intercept) {
  if (!data.has_both_classes()) throw DataError("need samples of both classes");
  const auto n = static_cast<double>(data.n_samples());
  const double n_pos = static_cast<double>(data.n_positive());
  const double n_neg = n - n_pos;

  // Derivative of each sample's loss w.r.t. its margin at w = 0.
  std::vector<double> dloss(data.n_samples());
  if (loss == Loss::logistic) {
    const double b = fit_intercept ? std::log(n_pos / n_neg) : 0.0;
    for (std::size_t i = 0; i < dloss.size(); ++i) {
      const double m = data.labels[i] * b;
      dloss[i] = -1.0 / (1.0 + std::exp(m));
    }
  } else {
    if (fit_intercept && n_pos != n_neg) {
      throw std::invalid_argument(
          "closed-form hinge threshold needs balanced classes when fitting an intercept");
    }
    // Every margin is inside (-1, 1) at the optimal intercept, so all
    // samples sit on the linear part of the hinge.
    std::fill(dloss.begin(), dloss.end(), -1.0);
  }
  double max_grad = 0.0;
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < dloss.size(); ++i) {
      g += dloss[i] * data.labels[i] * data.features(static_cast<Eigen::Index>(i), j);
    }
    max_grad = std::max(max_grad, std::abs(g / n));
  }
  if (max_grad == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / max_grad;
}

nlohmann::json to_json(const DecoderSpec& spec) {
  return {{"loss", to_string(spec.loss)},
          {"penalty", to_string(spec.penalty)},
          {"C", spec.C},
          {"tol", spec.tol},
          {"max_iter", spec.max_iter},
          {"fit_intercept", spec.fit_intercept}};
}

DecoderSpec decoder_spec_from_json(const nlohmann::json& j) {
  DecoderSpec s;
  s.loss = loss_from_string(j.at("loss").get<std::string>());
  s.penalty = penalty_from_string(j.at("penalty").get<std::string>());
  s.C = j.value("C", s.C);
  s.tol = j.value("tol", s.tol);
  s.max_iter = j.value("max_iter", s.max_iter);
  s.fit_intercept = j.value("fit_intercept", s.fit_intercept);
  s.validate();
  return s;
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const Preprocessor& p) {
  return {{"scale", to_vector(p.scale)},
          {"selected", p.selected},
          {"zero_variance", p.zero_variance},
          {"screen_fraction", p.screen_fraction}};
}

Preprocessor preprocessor_from_json(const nlohmann::json& j) {
  Preprocessor p;
  p.scale = from_vector(j.at("scale").get<std::vector<double>>());
  p.selected = j.at("selected").get<std::vector<bool>>();
  p.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
  p.screen_fraction = j.at("screen_fraction").get<double>();
  return p;
}

nlohmann::json to_json(const TrainedModel& model) {
  return {{"spec", to_json(model.spec)},
          {"preprocessor", to_json(model.preprocessor)},
          {"weights", to_vector(model.weights)},
          {"intercept", model.intercept},
          {"objective", model.objective_value},
          {"converged", model.converged},
          {"iterations", model.iterations}};
}

TrainedModel trained_model_from_json(const nlohmann::json& j) {
  TrainedModel m;
  m.spec = decoder_spec_from_json(j.at("spec"));
  m.preprocessor = preprocessor_from_json(j.at("preprocessor"));
  m.weights = from_vector(j.at("weights").get<std::vector<double>>());
  m.intercept = j.at("intercept").get<double>();
  m.objective_value = j.at("objective").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  return m;
}

nlohmann::json to_json(const LinearModel& model) {
  return {{"weights", to_vector(model.weights)}, {"intercept", model.intercept}};
}

}  // namespace decodecv

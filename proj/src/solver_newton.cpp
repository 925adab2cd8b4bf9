#include "solvers.hpp"

#include <cmath>

namespace decodecv::detail {

Problem make_problem(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     double lambda, bool fit_intercept) {
  Problem p;
  p.n_penalized = x.cols();
  p.lambda = lambda;
  p.design.resize(x.rows(), x.cols() + (fit_intercept ? 1 : 0));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)];
    p.design.row(i).head(x.cols()) = y * x.row(i);
    if (fit_intercept) p.design(i, x.cols()) = y;
  }
  return p;
}

double mean_logistic_loss(const Eigen::VectorXd& margins) {
  double total = 0.0;
  for (double m : margins) total += logistic_loss(m);
  return total / static_cast<double>(margins.size());
}

double mean_hinge_loss(const Eigen::VectorXd& margins) {
  double total = 0.0;
  for (double m : margins) total += hinge_loss(m);
  return total / static_cast<double>(margins.size());
}

namespace {

// sigma(-m) = 1 / (1 + exp(m)), evaluated without overflow.
double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double l2_objective(const Problem& p, const Eigen::VectorXd& u) {
  const Eigen::VectorXd margins = p.design * u;
  return mean_logistic_loss(margins) +
         p.lambda * u.head(p.n_penalized).squaredNorm();
}

}  // namespace

Solution solve_logistic_l2(const Problem& p, double tol, int max_iter) {
  const auto n = static_cast<double>(p.design.rows());
  const auto q = p.design.cols();
  Solution sol;
  sol.u = Eigen::VectorXd::Zero(q);
  double f = l2_objective(p, sol.u);

  for (int it = 0; it < max_iter; ++it) {
    sol.iterations = it + 1;
    const Eigen::VectorXd margins = p.design * sol.u;
    Eigen::VectorXd dloss(margins.size());
    Eigen::VectorXd curvature(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double s = sigmoid_neg(margins(i));
      dloss(i) = -s;
      curvature(i) = s * (1.0 - s);
    }
    Eigen::VectorXd grad = p.design.transpose() * dloss / n;
    grad.head(p.n_penalized) += 2.0 * p.lambda * sol.u.head(p.n_penalized);

    const Eigen::MatrixXd weighted =
        p.design.array().colwise() * (curvature.array() / n).sqrt();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(q, q);
    hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    hess.diagonal().head(p.n_penalized).array() += 2.0 * p.lambda;
    hess.diagonal().array() += 1e-12;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess.selfadjointView<Eigen::Lower>());
    const Eigen::VectorXd step = -ldlt.solve(grad);
    const double slope = grad.dot(step);
    if (!(slope < 0.0)) {
      sol.converged = grad.lpNorm<Eigen::Infinity>() < 1e-12;
      break;
    }
    // Half the squared Newton decrement estimates the suboptimality.
    const bool done = -0.5 * slope <= tol * (1.0 + std::abs(f));

    double t = 1.0;
    Eigen::VectorXd trial = sol.u + step;
    double f_trial = l2_objective(p, trial);
    while (f_trial > f + 0.25 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = sol.u + t * step;
      f_trial = l2_objective(p, trial);
    }
    if (f_trial <= f) {
      sol.u = std::move(trial);
      f = f_trial;
    }
    if (done) {
      sol.converged = true;
      break;
    }
    if (t <= 1e-12) break;
  }
  return sol;
}

}  // namespace decodecv::detail

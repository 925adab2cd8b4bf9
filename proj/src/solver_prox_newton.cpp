#include "solvers.hpp"

#include <cmath>

namespace decodecv::detail {

namespace {

double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double l1_objective(const Problem& p, const Eigen::VectorXd& u) {
  const Eigen::VectorXd margins = p.design * u;
  return mean_logistic_loss(margins) + p.lambda * u.head(p.n_penalized).lpNorm<1>();
}

}  // namespace

Solution solve_logistic_l1(const Problem& p, double tol, int max_iter) {
  const auto n = static_cast<double>(p.design.rows());
  const auto q = p.design.cols();
  Solution sol;
  sol.u = Eigen::VectorXd::Zero(q);
  if (p.has_intercept()) {
    // Intercept-only optimum: log(n+ / n-). The intercept column holds y_i.
    const double n_pos = (p.design.col(q - 1).array() > 0.0).cast<double>().sum();
    const double n_neg = n - n_pos;
    if (n_pos > 0.0 && n_neg > 0.0) sol.u(q - 1) = std::log(n_pos / n_neg);
  }
  double f = l1_objective(p, sol.u);

  Eigen::VectorXd d(q);
  Eigen::VectorXd hd(q);
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
    const Eigen::VectorXd grad = p.design.transpose() * dloss / n;
    const Eigen::MatrixXd weighted =
        p.design.array().colwise() * (curvature.array() / n).sqrt();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(q, q);
    hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
    hess.diagonal().array() += 1e-10;

    // Coordinate descent on g.d + d'Hd/2 + lambda * |u + d|_1.
    d.setZero();
    hd.setZero();
    const double scale = 1.0 + sol.u.lpNorm<Eigen::Infinity>();
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < q; ++j) {
        const double h = hess(j, j);
        const double g = grad(j) + hd(j);
        const double current = sol.u(j) + d(j);
        double next = current - g / h;
        if (j < p.n_penalized) next = soft_threshold(next, p.lambda / h);
        const double delta = next - current;
        if (delta != 0.0) {
          d(j) += delta;
          hd += delta * hess.col(j);
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change <= 1e-13 * scale) break;
    }

    const Eigen::VectorXd target = sol.u + d;
    const double model_decrease =
        grad.dot(d) + p.lambda * (target.head(p.n_penalized).lpNorm<1>() -
                                  sol.u.head(p.n_penalized).lpNorm<1>());
    if (!(model_decrease < 0.0)) {
      sol.converged = true;
      break;
    }
    const bool done = -model_decrease <= tol * (1.0 + std::abs(f));

    double t = 1.0;
    Eigen::VectorXd trial = target;
    double f_trial = l1_objective(p, trial);
    while (f_trial > f + 0.25 * t * model_decrease && t > 1e-12) {
      t *= 0.5;
      trial = sol.u + t * d;
      f_trial = l1_objective(p, trial);
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

#pragma once

// Convex solvers behind decodecv::train. All of them work on the signed
// augmented design A whose rows are y_i * [x_i, 1] (the trailing 1 only when
// an intercept is fitted), so the margin of sample i is A.row(i) . u. The
// first `n_penalized` coordinates of u are the weights.

#include "decodecv/decoder.hpp"

#include <Eigen/Dense>

namespace decodecv::detail {

struct Problem {
  Eigen::MatrixXd design;  // n x q signed augmented samples
  Eigen::Index n_penalized = 0;
  double lambda = 1.0;     // penalty weight, 1 / C
  bool has_intercept() const { return design.cols() > n_penalized; }
};

struct Solution {
  Eigen::VectorXd u;
  bool converged = false;
  int iterations = 0;
};

Problem make_problem(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     double lambda, bool fit_intercept);

double mean_logistic_loss(const Eigen::VectorXd& margins);
double mean_hinge_loss(const Eigen::VectorXd& margins);

// Newton's method with Armijo backtracking.
Solution solve_logistic_l2(const Problem& problem, double tol, int max_iter);

// Proximal Newton: quadratic model solved by cyclic coordinate descent
// with soft-thresholding, then a backtracking step on the true objective.
Solution solve_logistic_l1(const Problem& problem, double tol, int max_iter);

// Mehrotra predictor-corrector interior point on the hinge QP (l2) or LP
// (l1), followed by an exact intercept refit and, for l1, snapping of
// numerically-zero weights.
Solution solve_hinge(const Problem& problem, Penalty penalty, double tol,
                     int max_iter);

// Exact minimizer of mean hinge loss over the intercept for fixed weights.
// `scores` are x_i . w; picks the optimum closest to `current`.
double best_hinge_intercept(const Eigen::VectorXd& scores,
                            const std::vector<int>& labels, double current);

}  // namespace decodecv::detail

#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace decodecv::detail {

namespace {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::VectorXd;

// Problem scaled by n so duals live in [0, 1]:
//   min  sum_i xi_i + rho * R(w)
//   s.t. xi_i >= 1 - a_i . u,  xi_i >= 0
//        (l1) -t_j <= w_j <= t_j, R(w) = sum_j t_j;  (l2) R(w) = ||w||^2
// Inequalities are written G z + s = h with s >= 0 and duals z >= 0, in
// four groups: margin (M), xi >= 0 (N), and for l1 the two sides of the
// absolute value (P: w - t <= 0, Q: -w - t <= 0).
struct State {
  VectorXd u, xi, t;
  ArrayXd sM, sN, sP, sQ;
  ArrayXd zM, zN, zP, zQ;
};

struct Direction {
  VectorXd u, xi, t;
  ArrayXd sM, sN, sP, sQ;
  ArrayXd zM, zN, zP, zQ;
};

struct Residuals {
  VectorXd du;  // dual, u block
  ArrayXd dxi, dt;
  ArrayXd pM, pN, pP, pQ;  // primal
};

class HingeIpm {
 public:
  HingeIpm(const Problem& problem, Penalty penalty)
      : A_(problem.design),
        n_(A_.rows()),
        q_(A_.cols()),
        p_(problem.n_penalized),
        l1_(penalty == Penalty::l1),
        rho_(static_cast<double>(A_.rows()) * problem.lambda) {}

  Solution run(double gap_tol, int max_iter) {
    init();
    Solution sol;
    int stalled = 0;
    for (int it = 0; it < max_iter; ++it) {
      sol.iterations = it + 1;
      const Residuals r = residuals();
      const double gap = duality_gap();
      const double pobj = primal_objective();
      const double rp = std::max({max_abs(r.pM), max_abs(r.pN), max_abs(r.pP), max_abs(r.pQ)});
      const double rd = std::max({r.du.lpNorm<Eigen::Infinity>(), max_abs(r.dxi), max_abs(r.dt)});
      if (rp <= 1e-9 && rd <= 1e-9 * (1.0 + rho_) && gap <= gap_tol * (1.0 + std::abs(pobj))) {
        sol.converged = true;
        break;
      }

      factor();
      const double mu = gap / static_cast<double>(n_constraints());

      // Predictor (affine scaling) direction.
      Direction aff = solve(r, complementarity(0.0, nullptr));
      const double a_aff = max_step(aff);
      const double mu_aff = gap_after(aff, a_aff) / static_cast<double>(n_constraints());
      const double sigma = std::pow(mu_aff / mu, 3);

      // Corrector with centering.
      Direction dir = solve(r, complementarity(sigma * mu, &aff));
      const double alpha = std::min(1.0, 0.99 * max_step(dir));
      apply(dir, alpha);
      stalled = alpha < 1e-10 ? stalled + 1 : 0;
      if (stalled >= 5) break;
    }
    sol.u = x_.u;
    return sol;
  }

 private:
  static double max_abs(const ArrayXd& a) { return a.size() ? a.abs().maxCoeff() : 0.0; }

  Index n_constraints() const { return 2 * n_ + (l1_ ? 2 * p_ : 0); }

  void init() {
    x_.u = VectorXd::Zero(q_);
    x_.xi = VectorXd::Constant(n_, 2.0);
    x_.sM = ArrayXd::Ones(n_);  // a.u + xi - 1 with u = 0
    x_.sN = ArrayXd::Constant(n_, 2.0);
    x_.zM = ArrayXd::Constant(n_, 0.5);
    x_.zN = ArrayXd::Constant(n_, 0.5);
    if (l1_) {
      x_.t = VectorXd::Ones(p_);
      x_.sP = ArrayXd::Ones(p_);
      x_.sQ = ArrayXd::Ones(p_);
      x_.zP = ArrayXd::Constant(p_, 0.5 * rho_);
      x_.zQ = ArrayXd::Constant(p_, 0.5 * rho_);
    } else {
      x_.t.resize(0);
      x_.sP.resize(0);
      x_.sQ.resize(0);
      x_.zP.resize(0);
      x_.zQ.resize(0);
    }
  }

  double primal_objective() const {
    const double reg = l1_ ? x_.t.sum() : x_.u.head(p_).squaredNorm();
    return x_.xi.sum() + rho_ * reg;
  }

  double duality_gap() const {
    double g = (x_.sM * x_.zM).sum() + (x_.sN * x_.zN).sum();
    if (l1_) g += (x_.sP * x_.zP).sum() + (x_.sQ * x_.zQ).sum();
    return g;
  }

  Residuals residuals() const {
    Residuals r;
    r.du = -A_.transpose() * x_.zM.matrix();
    if (l1_) {
      r.du.head(p_) += (x_.zP - x_.zQ).matrix();
      r.dt = rho_ - x_.zP - x_.zQ;
    } else {
      r.du.head(p_) += 2.0 * rho_ * x_.u.head(p_);
      r.dt.resize(0);
    }
    r.dxi = 1.0 - x_.zM - x_.zN;
    const ArrayXd margins = (A_ * x_.u).array();
    r.pM = -margins - x_.xi.array() + x_.sM + 1.0;
    r.pN = -x_.xi.array() + x_.sN;
    if (l1_) {
      const ArrayXd w = x_.u.head(p_).array();
      r.pP = w - x_.t.array() + x_.sP;
      r.pQ = -w - x_.t.array() + x_.sQ;
    } else {
      r.pP.resize(0);
      r.pQ.resize(0);
    }
    return r;
  }

  // Target complementarity residual r_c = target - s o z (- ds_aff o dz_aff).
  struct Compl {
    ArrayXd M, N, P, Q;
  };

  Compl complementarity(double target, const Direction* aff) const {
    Compl c;
    c.M = target - x_.sM * x_.zM;
    c.N = target - x_.sN * x_.zN;
    if (l1_) {
      c.P = target - x_.sP * x_.zP;
      c.Q = target - x_.sQ * x_.zQ;
    }
    if (aff != nullptr) {
      c.M -= aff->sM * aff->zM;
      c.N -= aff->sN * aff->zN;
      if (l1_) {
        c.P -= aff->sP * aff->zP;
        c.Q -= aff->sQ * aff->zQ;
      }
    }
    return c;
  }

  // Builds and factors the reduced (u-block) Newton matrix for the current
  // iterate; shared by predictor and corrector solves.
  void factor() {
    dM_ = x_.zM / x_.sM;
    dN_ = x_.zN / x_.sN;
    hM_ = dM_ + dN_;
    const ArrayXd coupling = dM_ * dN_ / hM_;
    const Eigen::MatrixXd weighted = A_.array().colwise() * coupling.sqrt();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(q_, q_);
    S.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    if (l1_) {
      dP_ = x_.zP / x_.sP;
      dQ_ = x_.zQ / x_.sQ;
      S.diagonal().head(p_).array() += 4.0 * dP_ * dQ_ / (dP_ + dQ_);
    } else {
      S.diagonal().head(p_).array() += 2.0 * rho_;
    }
    S.diagonal().array() += 1e-14 * (1.0 + S.diagonal().maxCoeff());
    ldlt_.compute(S.selfadjointView<Eigen::Lower>());
  }

  Direction solve(const Residuals& r, const Compl& c) const {
    // v = r_c / s + D r_p
    const ArrayXd vM = c.M / x_.sM + dM_ * r.pM;
    const ArrayXd vN = c.N / x_.sN + dN_ * r.pN;
    ArrayXd vP, vQ;
    if (l1_) {
      vP = c.P / x_.sP + dP_ * r.pP;
      vQ = c.Q / x_.sQ + dQ_ * r.pQ;
    }
    // rhs = -r_d - G' v
    VectorXd ru = -r.du + A_.transpose() * vM.matrix();
    const ArrayXd rxi = -r.dxi + vM + vN;
    ArrayXd rt;
    if (l1_) {
      ru.head(p_) -= (vP - vQ).matrix();
      rt = -r.dt + vP + vQ;
    }
    // Eliminate xi and t.
    VectorXd reduced = ru - A_.transpose() * (dM_ * rxi / hM_).matrix();
    if (l1_) reduced.head(p_) -= ((dQ_ - dP_) * rt / (dP_ + dQ_)).matrix();

    Direction d;
    d.u = ldlt_.solve(reduced);
    const ArrayXd a_du = (A_ * d.u).array();
    d.xi = ((rxi - dM_ * a_du) / hM_).matrix();
    const ArrayXd gM = -a_du - d.xi.array();
    const ArrayXd gN = -d.xi.array();
    d.sM = -r.pM - gM;
    d.sN = -r.pN - gN;
    d.zM = dM_ * (gM + r.pM) + c.M / x_.sM;
    d.zN = dN_ * (gN + r.pN) + c.N / x_.sN;
    if (l1_) {
      const ArrayXd dw = d.u.head(p_).array();
      d.t = ((rt - (dQ_ - dP_) * dw) / (dP_ + dQ_)).matrix();
      const ArrayXd gP = dw - d.t.array();
      const ArrayXd gQ = -dw - d.t.array();
      d.sP = -r.pP - gP;
      d.sQ = -r.pQ - gQ;
      d.zP = dP_ * (gP + r.pP) + c.P / x_.sP;
      d.zQ = dQ_ * (gQ + r.pQ) + c.Q / x_.sQ;
    }
    return d;
  }

  static double step_limit(const ArrayXd& v, const ArrayXd& dv, double limit) {
    for (Index i = 0; i < v.size(); ++i) {
      if (dv(i) < 0.0) limit = std::min(limit, -v(i) / dv(i));
    }
    return limit;
  }

  double max_step(const Direction& d) const {
    double a = std::numeric_limits<double>::infinity();
    a = step_limit(x_.sM, d.sM, a);
    a = step_limit(x_.sN, d.sN, a);
    a = step_limit(x_.zM, d.zM, a);
    a = step_limit(x_.zN, d.zN, a);
    if (l1_) {
      a = step_limit(x_.sP, d.sP, a);
      a = step_limit(x_.sQ, d.sQ, a);
      a = step_limit(x_.zP, d.zP, a);
      a = step_limit(x_.zQ, d.zQ, a);
    }
    return std::min(a, 1.0);
  }

  double gap_after(const Direction& d, double a) const {
    double g = ((x_.sM + a * d.sM) * (x_.zM + a * d.zM)).sum() +
               ((x_.sN + a * d.sN) * (x_.zN + a * d.zN)).sum();
    if (l1_) {
      g += ((x_.sP + a * d.sP) * (x_.zP + a * d.zP)).sum() +
           ((x_.sQ + a * d.sQ) * (x_.zQ + a * d.zQ)).sum();
    }
    return g;
  }

  void apply(const Direction& d, double a) {
    x_.u += a * d.u;
    x_.xi += a * d.xi;
    x_.sM += a * d.sM;
    x_.sN += a * d.sN;
    x_.zM += a * d.zM;
    x_.zN += a * d.zN;
    if (l1_) {
      x_.t += a * d.t;
      x_.sP += a * d.sP;
      x_.sQ += a * d.sQ;
      x_.zP += a * d.zP;
      x_.zQ += a * d.zQ;
    }
  }

  const Eigen::MatrixXd& A_;
  Index n_, q_, p_;
  bool l1_;
  double rho_;
  State x_;
  ArrayXd dM_, dN_, hM_, dP_, dQ_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

double hinge_objective(const Problem& p, Penalty penalty, const VectorXd& u) {
  const VectorXd margins = p.design * u;
  const auto w = u.head(p.n_penalized);
  const double reg = penalty == Penalty::l1 ? w.lpNorm<1>() : w.squaredNorm();
  return mean_hinge_loss(margins) + p.lambda * reg;
}

// Exact intercept for the current weights. The intercept column of the
// design holds y_i, so labels and unsigned scores are recovered from it.
void refit_intercept(const Problem& p, VectorXd& u) {
  if (!p.has_intercept()) return;
  const Index b = p.design.cols() - 1;
  std::vector<int> labels(static_cast<std::size_t>(p.design.rows()));
  VectorXd scores(p.design.rows());
  for (Index i = 0; i < p.design.rows(); ++i) {
    const double y = p.design(i, b);
    labels[static_cast<std::size_t>(i)] = y > 0.0 ? 1 : -1;
    scores(i) = y * p.design.row(i).head(p.n_penalized).dot(u.head(p.n_penalized));
  }
  u(b) = best_hinge_intercept(scores, labels, u(b));
}

}  // namespace

double best_hinge_intercept(const Eigen::VectorXd& scores, const std::vector<int>& labels,
                            double current) {
  // Sample i contributes max(0, 1 - y_i (f_i + b)), with a kink at
  // b_i = y_i - f_i: slope -1 left of it for positives, +1 right of it for
  // negatives.
  std::vector<double> pos_kinks;
  std::vector<double> neg_kinks;
  for (Index i = 0; i < scores.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    (y == 1 ? pos_kinks : neg_kinks).push_back(y - scores(i));
  }
  if (pos_kinks.empty() || neg_kinks.empty()) return current;
  std::sort(pos_kinks.begin(), pos_kinks.end());
  std::sort(neg_kinks.begin(), neg_kinks.end());

  const auto count_greater = [](const std::vector<double>& v, double b) {
    return static_cast<long>(v.end() - std::upper_bound(v.begin(), v.end(), b));
  };
  const auto count_less = [](const std::vector<double>& v, double b) {
    return static_cast<long>(std::lower_bound(v.begin(), v.end(), b) - v.begin());
  };
  const auto right_slope = [&](double b) {
    return -count_greater(pos_kinks, b) + (static_cast<long>(neg_kinks.size()) -
                                           count_greater(neg_kinks, b));
  };
  const auto left_slope = [&](double b) {
    return -(static_cast<long>(pos_kinks.size()) - count_less(pos_kinks, b)) +
           count_less(neg_kinks, b);
  };

  std::vector<double> kinks = pos_kinks;
  kinks.insert(kinks.end(), neg_kinks.begin(), neg_kinks.end());
  std::sort(kinks.begin(), kinks.end());
  // Minimizers form [lo, hi]: lo is the first kink with right slope >= 0,
  // hi the last kink with left slope <= 0.
  double lo = kinks.back();
  for (double k : kinks) {
    if (right_slope(k) >= 0) {
      lo = k;
      break;
    }
  }
  double hi = kinks.front();
  for (auto it = kinks.rbegin(); it != kinks.rend(); ++it) {
    if (left_slope(*it) <= 0) {
      hi = *it;
      break;
    }
  }
  if (hi < lo) hi = lo;
  return std::clamp(current, lo, hi);
}

Solution solve_hinge(const Problem& p, Penalty penalty, double tol, int max_iter) {
  HingeIpm ipm(p, penalty);
  Solution sol = ipm.run(std::min(tol, 1e-9), std::min(max_iter, 500));
  refit_intercept(p, sol.u);

  if (penalty == Penalty::l1) {
    const double f = hinge_objective(p, penalty, sol.u);
    const double cutoff = 1e-8 * std::max(1.0, sol.u.head(p.n_penalized).lpNorm<Eigen::Infinity>());
    VectorXd snapped = sol.u;
    bool changed = false;
    for (Index j = 0; j < p.n_penalized; ++j) {
      if (snapped(j) != 0.0 && std::abs(snapped(j)) <= cutoff) {
        snapped(j) = 0.0;
        changed = true;
      }
    }
    if (changed) {
      refit_intercept(p, snapped);
      if (hinge_objective(p, penalty, snapped) <= f + 1e-9) sol.u = std::move(snapped);
    }
  }
  return sol;
}

}  // namespace decodecv::detail

#include "decodecv/decoder.hpp"
#include "oracles.hpp"
#include "solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace decodecv;

namespace {

Dataset as_dataset(const oracle::Instance& inst) {
  std::vector<int> blocks(inst.y.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] = static_cast<int>(i % 3);
  return make_dataset(inst.x, inst.y, blocks);
}

DecoderSpec spec_of(Loss loss, Penalty penalty, double C) {
  DecoderSpec s;
  s.loss = loss;
  s.penalty = penalty;
  s.C = C;
  return s;
}

oracle::Minimizer reference(const oracle::Instance& inst, Loss loss, Penalty penalty) {
  const double lambda = 1.0 / inst.C;
  if (loss == Loss::logistic) return oracle::logistic(inst.x, inst.y, lambda, penalty == Penalty::l1);
  if (penalty == Penalty::l2) return oracle::hinge_l2(inst.x, inst.y, lambda);
  return oracle::hinge_l1(inst.x, inst.y, lambda);
}

}  // namespace

TEST_SUITE("decoder") {
  TEST_CASE("losses") {
    CHECK(hinge_loss(2.0) == 0.0);
    CHECK(hinge_loss(0.25) == 0.75);
    CHECK(logistic_loss(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(logistic_loss(-800.0) == doctest::Approx(800.0));
    CHECK(logistic_loss(800.0) >= 0.0);
    CHECK(std::isfinite(logistic_loss(-1e6)));
  }

  TEST_CASE("objective matches its definition") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 0, 1;
    const std::vector<int> y{1, -1};
    Eigen::VectorXd w(2);
    w << 0.5, -2.0;
    const auto s = spec_of(Loss::hinge, Penalty::l1, 4.0);
    // margins: 1*(0.5+0.1)=0.6, -1*(-2+0.1)=1.9
    CHECK(objective(x, y, s, w, 0.1) == doctest::Approx(0.5 * 0.4 + 2.5 / 4.0));
    const auto t = spec_of(Loss::logistic, Penalty::l2, 2.0);
    CHECK(objective(x, y, t, w, 0.1) ==
          doctest::Approx(0.5 * (logistic_loss(0.6) + logistic_loss(1.9)) + 4.25 / 2.0));
  }

  TEST_CASE("solvers agree with reference minimizers") {
    std::mt19937_64 gen(99);
    for (int k = 0; k < 12; ++k) {
      const auto inst = oracle::random_instance(gen);
      const auto d = as_dataset(inst);
      for (auto loss : {Loss::hinge, Loss::logistic}) {
        for (auto penalty : {Penalty::l1, Penalty::l2}) {
          const auto spec = spec_of(loss, penalty, inst.C);
          const auto m = train(d, spec);
          const double got = objective(inst.x, inst.y, spec, m.weights, m.intercept);
          const auto ref = reference(inst, loss, penalty);
          CAPTURE(k);
          CAPTURE(spec.name());
          CAPTURE(inst.C);
          CHECK(m.converged);
          CHECK(got == doctest::Approx(m.objective_value).epsilon(1e-12));
          CHECK(std::abs(got - ref.value) < 1e-6);
        }
      }
    }
  }

  TEST_CASE("logistic gradient matches finite differences") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 10; ++k) {
      const auto inst = oracle::random_instance(gen);
      Eigen::VectorXd w(inst.x.cols());
      for (auto& v : w) v = normal(gen);
      const double b = normal(gen);
      for (auto penalty : {Penalty::l1, Penalty::l2}) {
        const auto spec = spec_of(Loss::logistic, penalty, inst.C);
        const auto smooth = [&](const Eigen::VectorXd& ww, double bb) {
          double f = objective(inst.x, inst.y, spec, ww, bb);
          if (penalty == Penalty::l1) f -= penalty_value(penalty, ww) / spec.C;
          return f;
        };
        const auto g = logistic_gradient(inst.x, inst.y, spec, w, b);
        Eigen::VectorXd fd(g.size());
        const double h = 1e-6;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
          Eigen::VectorXd wp = w, wm = w;
          wp(j) += h;
          wm(j) -= h;
          fd(j) = (smooth(wp, b) - smooth(wm, b)) / (2 * h);
        }
        fd(w.size()) = (smooth(w, b + h) - smooth(w, b - h)) / (2 * h);
        CHECK((g - fd).norm() / std::max(g.norm(), 1e-8) < 1e-5);
        // Same gradient as the oracle for the loss part.
        const auto og = oracle::logistic_grad(inst.x, inst.y, w, b);
        Eigen::VectorXd expect = og;
        if (penalty == Penalty::l2) expect.head(w.size()) += 2.0 / spec.C * w;
        CHECK((g - expect).norm() < 1e-12);
      }
    }
    CHECK_THROWS(logistic_gradient(Eigen::MatrixXd::Zero(2, 1), {1, -1},
                                   spec_of(Loss::hinge, Penalty::l2, 1.0),
                                   Eigen::VectorXd::Zero(1), 0.0));
  }

  TEST_CASE("l1 weights vanish exactly below the critical C") {
    std::mt19937_64 gen(17);
    for (int k = 0; k < 10; ++k) {
      for (auto loss : {Loss::logistic, Loss::hinge}) {
        const auto inst = oracle::random_instance(gen, loss == Loss::hinge);
        const auto d = as_dataset(inst);
        const double c = l1_critical_C(d, loss);
        REQUIRE(c > 0);
        const auto below = train(d, spec_of(loss, Penalty::l1, 0.9 * c));
        CHECK(below.weights.cwiseAbs().maxCoeff() == 0.0);
        const auto above = train(d, spec_of(loss, Penalty::l1, 1.2 * c));
        CHECK(above.weights.cwiseAbs().maxCoeff() > 0.0);
      }
    }
  }

  TEST_CASE("hinge critical C needs balanced classes") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    const auto d = make_dataset(x, {-1, 1, 1}, {0, 1, 2});
    CHECK_THROWS(l1_critical_C(d, Loss::hinge));
    CHECK_NOTHROW(l1_critical_C(d, Loss::logistic));
  }

  TEST_CASE("exact hinge intercept") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 20; ++k) {
      const auto inst = oracle::random_instance(gen);
      Eigen::VectorXd w(inst.x.cols());
      for (auto& v : w) v = normal(gen);
      const Eigen::VectorXd scores = inst.x * w;
      const double b = detail::best_hinge_intercept(scores, inst.y, 0.0);
      const double ob = oracle::best_intercept(inst.x, inst.y, w);
      CHECK(oracle::hinge_value(inst.x, inst.y, w, b) ==
            doctest::Approx(oracle::hinge_value(inst.x, inst.y, w, ob)).epsilon(1e-12));
    }
  }

  TEST_CASE("full-space model reproduces the decision function") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(30, 6);
    std::vector<int> y(30), b(30);
    for (int i = 0; i < 30; ++i) {
      y[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
      b[static_cast<std::size_t>(i)] = i / 5;
      for (int j = 0; j < 6; ++j) x(i, j) = (j + 1) * normal(gen) + 0.4 * y[static_cast<std::size_t>(i)];
    }
    const auto d = make_dataset(x, y, b);
    for (auto loss : {Loss::hinge, Loss::logistic}) {
      const auto m = train(d, spec_of(loss, Penalty::l2, 1.0), {true, 0.5});
      CHECK(m.weights.size() == 3);
      const auto full = m.full_space();
      CHECK(full.weights.size() == 6);
      const Eigen::VectorXd a = decision_function(m, d);
      const Eigen::VectorXd c = decision_function(full, d);
      CHECK((a - c).cwiseAbs().maxCoeff() < 1e-12);
      int zeros = 0;
      for (Eigen::Index j = 0; j < 6; ++j) zeros += full.weights(j) == 0.0;
      CHECK(zeros == 3);
    }
  }

  TEST_CASE("prediction ties go to +1") {
    Eigen::VectorXd v(3);
    v << -0.5, 0.0, 2.0;
    CHECK(predict(v) == std::vector<int>{-1, 1, 1});
  }

  TEST_CASE("model json round trip is exact") {
    std::mt19937_64 gen(21);
    const auto inst = oracle::random_instance(gen);
    const auto d = as_dataset(inst);
    const auto m = train(d, spec_of(Loss::logistic, Penalty::l1, 3.0), {true, 0.5});
    const auto back = trained_model_from_json(to_json(m));
    CHECK(back.weights == m.weights);
    CHECK(back.intercept == m.intercept);
    CHECK(back.preprocessor == m.preprocessor);
    CHECK(back.spec.name() == m.spec.name());
    CHECK(back.spec.C == m.spec.C);
    CHECK(decision_function(back, d) == decision_function(m, d));
  }

  TEST_CASE("spec validation and names") {
    CHECK(spec_of(Loss::hinge, Penalty::l2, 1).name() == "svm_l2");
    CHECK(spec_of(Loss::logistic, Penalty::l1, 1).name() == "logreg_l1");
    CHECK_THROWS(spec_of(Loss::hinge, Penalty::l2, 0.0).validate());
    CHECK_THROWS(spec_of(Loss::hinge, Penalty::l2, -1.0).validate());
    CHECK_THROWS(loss_from_string("squared"));
    CHECK(penalty_from_string("l1") == Penalty::l1);
  }

  TEST_CASE("single-class training data is rejected") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Dataset d;
    d.features = x;
    d.labels = {1, 1, 1};
    d.blocks = {0, 0, 0};
    d.block_names = {"0"};
    CHECK_THROWS(train(d, DecoderSpec{}));
  }
}

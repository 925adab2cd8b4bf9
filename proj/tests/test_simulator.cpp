#include "decodecv/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace decodecv;

namespace {

double lag1_autocorrelation(const Eigen::MatrixXd& noise) {
  double num = 0, den = 0;
  for (Eigen::Index j = 0; j < noise.cols(); ++j) {
    const Eigen::VectorXd c = noise.col(j).array() - noise.col(j).mean();
    num += c.head(c.size() - 1).dot(c.tail(c.size() - 1));
    den += c.squaredNorm();
  }
  return num / den;
}

Eigen::MatrixXd noise_of(const Dataset& d, double mu) {
  Eigen::MatrixXd n = d.features;
  for (Eigen::Index i = 0; i < n.rows(); ++i) n.row(i).array() -= mu * d.labels[i];
  return n;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("kernel sums to one and is symmetric") {
    const auto k = gaussian_kernel(2.0);
    CHECK(k.size() == 17);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == k[k.size() - 1 - i]);
  }

  TEST_CASE("smoothing with reflected edges preserves constants") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(10, 3, 2.5);
    const auto y = smooth_columns(x, gaussian_kernel(3.0));
    CHECK((y.array() - 2.5).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("labels: balanced, both classes per block, every layout") {
    for (auto layout : {LabelLayout::runs, LabelLayout::mirrored_runs, LabelLayout::alternating,
                        LabelLayout::shuffled}) {
      for (std::size_t n : {20, 21, 200, 37}) {
        const auto y = simulated_labels(n, 10, layout, 0, 9);
        CHECK(y.size() == n);
        const long pos = std::count(y.begin(), y.end(), 1);
        CHECK(std::abs(2 * pos - static_cast<long>(n)) <= 1);
        for (std::size_t b = 0; b + 1 < (n + 9) / 10; ++b) {
          const auto first = y.begin() + static_cast<long>(b * 10);
          CHECK(std::count(first, first + 10, 1) > 0);
          CHECK(std::count(first, first + 10, -1) > 0);
        }
      }
    }
    const auto alt = simulated_labels(6, 6, LabelLayout::alternating);
    CHECK(alt == std::vector<int>{1, -1, 1, -1, 1, -1});
    const auto runs = simulated_labels(6, 6, LabelLayout::runs);
    CHECK(runs == std::vector<int>{1, 1, 1, -1, -1, -1});
  }

  TEST_CASE("generate: shapes, blocks, determinism") {
    SimulationConfig c;
    c.n_features = 20;
    c.n_train = 100;
    c.n_test = 500;
    c.seed = 11;
    const auto a = generate(c);
    const auto b = generate(c);
    CHECK(a.train.features == b.train.features);
    CHECK(a.test.features == b.test.features);
    CHECK(a.train.n_samples() == 100);
    CHECK(a.train.n_blocks() == 10);
    CHECK(a.test.n_samples() == 500);
    CHECK(a.train.n_features() == 20);
    for (std::size_t i = 0; i < 100; ++i) CHECK(a.train.blocks[i] == static_cast<int>(i / 10));
    c.seed = 12;
    CHECK(generate(c).train.features != a.train.features);
  }

  TEST_CASE("smoothed noise is autocorrelated with unit variance") {
    SimulationConfig c;
    c.mu = 0.1;
    c.n_features = 50;
    c.n_train = 200;
    c.n_test = 4000;
    c.seed = 3;
    const auto d = generate(c);
    const auto noise = noise_of(d.test, c.mu);
    // Gaussian kernel with sigma = 2: lag-1 correlation exp(-1/(4 sigma^2)).
    CHECK(lag1_autocorrelation(noise) == doctest::Approx(std::exp(-1.0 / 16.0)).epsilon(0.02));
    const double var = (noise.array() - noise.mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));

    c.smoothing_sigma = 0.25;  // kernel radius 1, nearly white
    const auto raw = noise_of(generate(c).test, c.mu);
    CHECK(lag1_autocorrelation(raw) < 0.05);
  }

  TEST_CASE("class means sit at +-mu") {
    SimulationConfig c;
    c.mu = 0.2;
    c.n_features = 10;
    c.n_test = 20000;
    c.seed = 4;
    const auto d = generate(c).test;
    Eigen::VectorXd pos = Eigen::VectorXd::Zero(10), neg = Eigen::VectorXd::Zero(10);
    double np = 0, nn = 0;
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
      if (d.labels[i] > 0) {
        pos += d.features.row(i).transpose();
        ++np;
      } else {
        neg += d.features.row(i).transpose();
        ++nn;
      }
    }
    CHECK((pos / np).mean() == doctest::Approx(0.2).epsilon(0.25));
    CHECK((neg / nn).mean() == doctest::Approx(-0.2).epsilon(0.25));
    const auto dir = bayes_direction(c);
    CHECK(dir.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("invalid configs are rejected") {
    SimulationConfig c;
    c.n_blocks = 0;
    CHECK_THROWS(c.validate());
    c = {};
    c.n_train = 15;  // not a multiple of n_blocks
    CHECK_THROWS(c.validate());
    c = {};
    c.smoothing_sigma = 0;
    CHECK_THROWS(c.validate());
    CHECK_THROWS(label_layout_from_string("zigzag"));
    CHECK(label_layout_from_string(to_string(LabelLayout::shuffled)) == LabelLayout::shuffled);
  }
}

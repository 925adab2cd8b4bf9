#include "decodecv/preprocess.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace decodecv;

namespace {

Dataset toy() {
  Eigen::MatrixXd x(6, 3);
  // f0: strong class signal, f1: none, f2: weak signal, larger scale
  x << 1.0, 5.0, 10.0,
       1.2, -5.0, 30.0,
       0.8, 5.0, 20.0,
       -1.0, -5.0, 0.0,
       -1.1, 5.0, 20.0,
       -0.9, -5.0, 10.0;
  return make_dataset(x, {1, 1, 1, -1, -1, -1}, {0, 0, 1, 1, 2, 2});
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("column std uses n-1") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    CHECK(column_std(x)(0) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  }

  TEST_CASE("f scores match the two-sample formula") {
    const auto d = toy();
    const auto f = f_scores(d);
    // f0: means 1, -1; within SS = 0.08 + 0.02 = 0.1 over 4 dof.
    const double between = 3 * 1.0 + 3 * 1.0;  // n_k (mean_k - grand)^2
    CHECK(f(0) == doctest::Approx(between / (0.1 / 4.0)));
    CHECK(std::isfinite(f(1)));
    CHECK(f(2) == doctest::Approx(1.5));
    CHECK(f(2) < f(0));
    CHECK(f(0) > f(1));
  }

  TEST_CASE("zero within-class variance and constant features") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 7, 1, 7, 2, 7, 2, 7;
    const auto d = make_dataset(x, {-1, -1, 1, 1}, {0, 0, 1, 1});
    const auto f = f_scores(d);
    CHECK(std::isinf(f(0)));
    CHECK(f(1) == 0.0);
  }

  TEST_CASE("screen count rounds up with a floor of one") {
    CHECK(screen_count(100, 0.2) == 20);
    CHECK(screen_count(10, 0.25) == 3);
    CHECK(screen_count(3, 0.01) == 1);
    CHECK(screen_count(5, 1.0) == 5);
  }

  TEST_CASE("screening keeps the strongest, ties to lower index") {
    Eigen::MatrixXd x(4, 3);
    x << 1, 1, 0, 1, 1, 1, 2, 2, 0, 2, 2, 1;
    const auto d = make_dataset(x, {-1, -1, 1, 1}, {0, 0, 1, 1});
    const auto p = univariate_screen(d, 0.34);  // 2 of 3; f0 and f1 tie
    CHECK(p.selected == std::vector<bool>{true, true, false});
    const auto q = univariate_screen(d, 0.2);
    CHECK(q.selected == std::vector<bool>{true, false, false});
  }

  TEST_CASE("normalization is fitted on train only and applied as is") {
    const auto d = toy();
    const auto p = fit_preprocessor(d, {true, 1.0});
    const auto t = apply_preprocessor(p, d);
    const auto s = column_std(t.features);
    for (Eigen::Index j = 0; j < s.size(); ++j) CHECK(s(j) == doctest::Approx(1.0));
    // Another dataset is transformed with the train divisors.
    Eigen::MatrixXd other = Eigen::MatrixXd::Constant(2, 3, 2.0);
    const auto o = p.transform(other);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(o(0, j) == doctest::Approx(2.0 / p.scale(j)));
  }

  TEST_CASE("zero-variance columns are left unscaled") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 3, 2, 3, 3, 3, 4, 3;
    const auto d = make_dataset(x, {-1, 1, -1, 1}, {0, 0, 1, 1});
    const auto p = fit_preprocessor(d, {true, 1.0});
    CHECK(p.any_zero_variance());
    CHECK(p.zero_variance == std::vector<bool>{false, true});
    CHECK(p.scale(1) == 1.0);
  }

  TEST_CASE("options validate") {
    CHECK_THROWS(PreprocessOptions{true, 0.0}.validate());
    CHECK_THROWS(PreprocessOptions{true, 1.5}.validate());
    CHECK_NOTHROW(PreprocessOptions{false, 0.2}.validate());
  }
}

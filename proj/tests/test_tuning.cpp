#include "decodecv/simulator.hpp"
#include "decodecv/tuning.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace decodecv;

namespace {

Dataset small_task(std::uint64_t seed) {
  SimulationConfig c;
  c.mu = 0.3;
  c.n_features = 8;
  c.n_train = 60;
  c.n_test = 2;
  c.seed = seed;
  return generate(c).train;
}

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("grids") {
    const auto g = default_C_grid();
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 1e-5);
    CHECK(g[5] == 1.0);
    CHECK(g[7] == 100.0);
    CHECK(g.back() == 1e5);
    const auto h = log_grid(0.01, 100, 5);
    CHECK(h == std::vector<double>{0.01, 0.1, 1.0, 10.0, 100.0});
    const auto k = log_grid(1, 2, 3);
    CHECK(k[1] == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("argmax ties go to the smaller C") {
    CHECK(best_grid_index({0.5, 0.7, 0.7, 0.6}) == 1);
    CHECK(best_grid_index({0.9}) == 0);
  }

  TEST_CASE("pairwise sum is exact on small integers and order fixed") {
    std::vector<double> v(1000, 0.1);
    const double s = pairwise_sum(v);
    CHECK(s == doctest::Approx(100.0).epsilon(1e-13));
    CHECK(pairwise_sum(v) == s);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  }

  TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
      if (i == 7) throw std::runtime_error("boom");
    }));
  }

  TEST_CASE("refit picks the best mean and retrains on everything") {
    const auto d = small_task(1);
    DecoderSpec family;
    const auto strategy = TuningStrategy::refit(log_grid(1e-3, 1e3, 7));
    const auto out = tune(d, strategy, family, {}, 5);
    REQUIRE(out.chosen_C.size() == 1);
    const auto curve = out.curve.mean_curve();
    const auto best = best_grid_index(curve);
    CHECK(out.chosen_C[0] == out.curve.grid[best]);
    CHECK(out.cv_estimate == curve[best]);
    REQUIRE(out.trained);
    const auto direct = train(d, family.with_C(out.chosen_C[0]));
    CHECK(out.model.weights == direct.full_space().weights);
  }

  TEST_CASE("average combines each split's best model") {
    const auto d = small_task(2);
    DecoderSpec family;
    family.loss = Loss::logistic;
    auto strategy = TuningStrategy::average(log_grid(1e-2, 1e2, 5));
    strategy.inner.n_splits = 4;
    const auto plan = make_plan(d, strategy.inner, 11);
    const auto run = run_grid(d, family, strategy.grid, plan, {});
    const auto out = select(d, strategy, family, &run, {});
    REQUIRE(out.chosen_C.size() == 4);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.n_features());
    double b = 0;
    for (std::size_t s = 0; s < 4; ++s) {
      std::size_t g_best = 0;
      for (std::size_t g = 1; g < run.table.grid.size(); ++g)
        if (run.table.at(g, s) > run.table.at(g_best, s)) g_best = g;
      CHECK(out.chosen_C[s] == run.table.grid[g_best]);
      w += run.models[g_best * 4 + s].weights;
      b += run.models[g_best * 4 + s].intercept;
    }
    CHECK((out.model.weights - w / 4.0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(out.model.intercept == doctest::Approx(b / 4.0));
    CHECK(!out.trained);
  }

  TEST_CASE("fixed C skips the inner loop") {
    const auto d = small_task(3);
    const auto out = tune(d, TuningStrategy::fixed(10.0), DecoderSpec{}, {}, 0);
    CHECK(out.curve.empty());
    CHECK(std::isnan(out.cv_estimate));
    CHECK(out.chosen_C == std::vector<double>{10.0});
  }

  TEST_CASE("jobs do not change the outcome") {
    const auto d = small_task(4);
    const auto s = TuningStrategy::refit(log_grid(1e-2, 1e2, 5));
    const auto a = tune(d, s, DecoderSpec{}, {true, 0.5}, 8, 1);
    const auto b = tune(d, s, DecoderSpec{}, {true, 0.5}, 8, 3);
    CHECK(a.curve.accuracy == b.curve.accuracy);
    CHECK(a.model.weights == b.model.weights);
    CHECK(to_json(a).dump() == to_json(b).dump());
  }

  TEST_CASE("strategy names and validation") {
    CHECK(TuningStrategy::refit().name() == "refit");
    CHECK(TuningStrategy::average().name() == "average");
    CHECK(TuningStrategy::fixed(1000).name() == "C=1000");
    auto s = TuningStrategy::refit({});
    CHECK_THROWS(s.validate());
    s = TuningStrategy::refit({1.0, -1.0});
    CHECK_THROWS(s.validate());
  }
}

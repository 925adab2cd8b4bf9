#include "decodecv/config.hpp"

#include <doctest.h>

#include <string>

using namespace decodecv;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "exp.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const auto c = parse_config(R"({"data": {"simulation": {}}})");
    REQUIRE(c.simulation);
    CHECK(c.simulation->mu == std::vector<double>{0.05, 0.1, 0.2});
    CHECK(c.simulation->base.n_features == 100);
    CHECK(c.simulation->base.n_train == 200);
    CHECK(c.simulation->base.n_test == 10000);
    CHECK(c.simulation->base.smoothing_sigma == 2.0);
    CHECK(c.repeats == 100);
    CHECK(c.decoders.size() == 4);
    CHECK(c.strategies.size() == 4);
    CHECK(c.cv_strategies.size() == 5);
    CHECK(c.preprocessing.normalize);
    CHECK(c.preprocessing.screen_fraction == 0.2);
    CHECK(c.validation.n_splits == 10);
    CHECK(c.validation.fraction == 0.5);
  }

  TEST_CASE("explicit values are read") {
    const auto c = parse_config(R"({
      "name": "x",
      "data": {"simulation": {"mu": [0.3], "n_features": 5, "n_train": 40, "n_blocks": 4,
                              "label_layout": "alternating"}},
      "repeats": 3,
      "decoders": [{"loss": "logistic", "penalty": "l1"}],
      "strategies": ["refit", "C=10"],
      "grid": {"lo": 0.01, "hi": 100, "n": 5},
      "inner": {"n_splits": 4, "test_fraction": 0.25},
      "cv_strategies": ["loo_block", "shuffle_7"],
      "preprocessing": {"variance_normalization": false, "screen_fraction": 1.0},
      "seed": 9, "jobs": 2
    })");
    CHECK(c.simulation->base.label_layout == LabelLayout::alternating);
    CHECK(c.decoders[0].name() == "logreg_l1");
    CHECK(c.strategies[1].kind == StrategyKind::fixed);
    CHECK(c.strategies[1].fixed_C == 10.0);
    CHECK(c.strategies[0].grid == log_grid(0.01, 100, 5));
    CHECK(c.strategies[0].inner.n_splits == 4);
    CHECK(c.strategies[0].inner.test_fraction == 0.25);
    CHECK(c.cv_strategies[1].n_splits == 7);
    CHECK(!c.preprocessing.normalize);
    CHECK(c.seed == 9);
    CHECK(c.jobs == 2);
  }

  TEST_CASE("errors carry file, line and path") {
    const auto e = error_of("{\n  \"data\": {\"simulation\": {}},\n  \"repeats\": -4\n}");
    CHECK(e.find("exp.json:3") != std::string::npos);
    CHECK(e.find("repeats") != std::string::npos);
    const auto u = error_of("{\"data\": {\"simulation\": {}},\n \"bogus\": 1}");
    CHECK(u.find("exp.json:2") != std::string::npos);
    CHECK(u.find("bogus") != std::string::npos);
    const auto p = error_of("{\"data\": \n\n {oops}");
    CHECK(p.find("exp.json:3") != std::string::npos);
  }

  TEST_CASE("invalid values are rejected") {
    const char* bad[] = {
        R"({})",
        R"({"data": {"simulation": {}, "csv": ["a.csv"]}})",
        R"({"data": {"simulation": {"n_train": 15}}})",
        R"({"data": {"simulation": {}}, "strategies": ["best"]})",
        R"({"data": {"simulation": {}}, "cv_strategies": ["shuffle_0"]})",
        R"({"data": {"simulation": {}}, "decoders": [{"loss": "hinge", "penalty": "l3"}]})",
        R"({"data": {"simulation": {}}, "validation": {"fraction": 1.0}})",
        R"({"data": {"simulation": {}}, "preprocessing": {"screen_fraction": 0}})",
        R"({"data": {"simulation": {}}, "jobs": 0})",
        R"({"data": {"simulation": {"mu": []}}})",
    };
    for (const char* text : bad) {
      CAPTURE(text);
      CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
  }

  TEST_CASE("canonical form round trips and the hash ignores run control") {
    const auto c = parse_config(R"({"data": {"simulation": {"mu": [0.1]}}, "seed": 3})");
    const auto d = config_from_json(to_json(c));
    CHECK(canonical_dump(d) == canonical_dump(c));
    CHECK(config_hash(d) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    auto e = c;
    e.jobs = 8;
    e.output_dir = "elsewhere";
    e.max_units = 3;
    CHECK(config_hash(e) == config_hash(c));
    e.seed = 4;
    CHECK(config_hash(e) != config_hash(c));
  }

  TEST_CASE("strategy and splitter names parse") {
    CHECK(strategy_from_string("average").kind == StrategyKind::average_best);
    CHECK(strategy_from_string("C=0.001").fixed_C == 0.001);
    CHECK_THROWS(strategy_from_string("C=abc"));
    CHECK(splitter_from_string("loo_sample").kind == SplitterKind::leave_one_sample_out);
    CHECK(splitter_from_string("shuffle_50").n_splits == 50);
    CHECK_THROWS(splitter_from_string("kfold"));
  }

  TEST_CASE("shipped configs load") {
    for (const char* name : {"simulation_cv.json", "simulation_tuning.json", "smoke.json"}) {
      CAPTURE(name);
      const auto c = load_config(std::string(DECODECV_SOURCE_DIR) + "/configs/" + name);
      CHECK_NOTHROW(c.validate());
    }
  }
}

#include "decodecv/evaluation.hpp"
#include "decodecv/report.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace decodecv;

namespace {

const double nan = std::numeric_limits<double>::quiet_NaN();

ExperimentRecord rec(std::string task, std::size_t split, std::string decoder, std::string strategy,
                     double acc, double stab = nan) {
  ExperimentRecord r;
  r.benchmark = "tuning";
  r.dataset = "d";
  r.task = std::move(task);
  r.validation_split = split;
  r.decoder = std::move(decoder);
  r.penalty = "l2";
  r.strategy = std::move(strategy);
  r.validation_accuracy = acc;
  r.stability = stab;
  return r;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("accuracy") {
    CHECK(accuracy({1, -1, 1, 1}, {1, 1, 1, -1}) == 0.5);
    CHECK_THROWS(accuracy({1}, {1, -1}));
    CHECK_THROWS(accuracy({}, {}));
  }

  TEST_CASE("cv estimate counts single-class splits as invalid") {
    Eigen::MatrixXd x(6, 1);
    x << -2, -1, -1.5, 1, 2, 1.5;
    const auto d = make_dataset(x, {-1, -1, -1, 1, 1, 1}, {0, 0, 1, 1, 2, 2});
    SplitPlan plan;
    plan.splits.push_back({{0, 1, 2, 3}, {4, 5}});  // valid
    plan.splits.push_back({{0, 1}, {2, 3, 4, 5}});  // train has one class
    DecoderSpec spec;
    spec.C = 100.0;  // weak penalty, so the 3:1 training side is separated
    const auto r = cv_estimate(d, plan, spec);
    CHECK(r.invalid_splits == 1);
    CHECK(std::isnan(r.per_split[1]));
    CHECK(r.estimate == r.per_split[0]);
    CHECK(r.estimate == 1.0);

    SplitPlan bad;
    bad.splits.push_back({{0, 1}, {3}});
    CHECK(std::isnan(cv_estimate(d, bad, spec).estimate));
  }

  TEST_CASE("percentiles are inclusive") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(percentile(v, 0.0) == 1);
    CHECK(percentile(v, 1.0) == 5);
    CHECK(percentile(v, 0.5) == 3);
    CHECK(percentile(v, 0.25) == 2);
    CHECK(percentile(v, 0.1) == doctest::Approx(1.4));
    CHECK(percentile({7.0}, 0.3) == 7.0);
  }

  TEST_CASE("discrepancy summary") {
    const auto s = discrepancy({{0.9, 0.8}, {0.7, 0.8}, {0.8, 0.8}});
    CHECK(s.mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(0.0).scale(1));
    CHECK(s.deltas.size() == 3);
    CHECK(s.p95 == doctest::Approx(0.09));
  }

  TEST_CASE("pearson and stability") {
    Eigen::VectorXd a(3), b(3), c(3), z(3);
    a << 1, 2, 3;
    b << 2, 4, 6.5;
    c << 3, 2, 1;
    z << 1, 1, 1;
    CHECK(pearson(a, a) == doctest::Approx(1.0));
    CHECK(pearson(a, c) == doctest::Approx(-1.0));
    CHECK(std::isnan(pearson(a, z)));
    const auto s = stability({a, b, c});
    const double expected = (pearson(a, b) + pearson(a, c) + pearson(b, c)) / 3.0;
    CHECK(s.value == doctest::Approx(expected));
    CHECK(!s.degenerate);
    const auto t = stability({a, b, z});
    CHECK(t.degenerate);
    CHECK(t.value == doctest::Approx(pearson(a, b) / 3.0));
    CHECK_THROWS(stability({a}));
  }

  TEST_CASE("results csv round trip") {
    std::vector<ExperimentRecord> rs;
    auto r = rec("mu=0.1", 2, "svm", "average", 0.75, 0.5);
    r.cv_estimate = 0.8;
    r.delta = r.cv_estimate - r.validation_accuracy;
    r.chosen_C = {0.1, 10};
    r.config_hash = "abc";
    r.seed = 1234567890123ULL;
    rs.push_back(r);
    auto q = rec("task, with comma", 0, "logreg", "C=1", 1.0 / 3.0);
    q.dataset = "say \"hi\"";
    rs.push_back(q);
    std::ostringstream out;
    write_records_csv(rs, out);
    std::istringstream in(out.str());
    const auto back = read_records_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].chosen_C == r.chosen_C);
    CHECK(back[0].seed == r.seed);
    CHECK(back[0].stability == 0.5);
    CHECK(back[1].task == q.task);
    CHECK(back[1].dataset == q.dataset);
    CHECK(back[1].validation_accuracy == q.validation_accuracy);
    CHECK(std::isnan(back[1].stability));
    std::ostringstream again;
    write_records_csv(back, again);
    CHECK(again.str() == out.str());
  }

  TEST_CASE("missing column is named") {
    std::istringstream in("benchmark,dataset\ncv,x\n");
    try {
      read_records_csv(in);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("missing column 'task'") != std::string::npos);
    }
  }

  TEST_CASE("tradeoff deltas are centred per split and decoder") {
    std::vector<ExperimentRecord> rs{
        rec("t", 0, "svm", "refit", 0.8, 0.2),   rec("t", 0, "svm", "average", 0.9, 0.4),
        rec("t", 1, "svm", "refit", 0.6, 0.2),   rec("t", 1, "svm", "average", 0.6, 0.4),
        rec("t", 0, "logreg", "refit", 0.5, 0.1), rec("t", 0, "logreg", "average", 0.7, 0.1),
    };
    const auto deltas = centered_accuracy_deltas(rs);
    CHECK(deltas[0] == doctest::Approx(-0.05));
    CHECK(deltas[1] == doctest::Approx(0.05));
    CHECK(deltas[2] == doctest::Approx(0.0));
    CHECK(deltas[4] == doctest::Approx(-0.1));
    const auto rows = tradeoff_summary(rs);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].decoder == "svm");
    CHECK(rows[0].strategy == "refit");
    CHECK(rows[0].n == 2);
    CHECK(rows[0].mean_delta_accuracy == doctest::Approx(-0.025));
    CHECK(rows[0].mean_delta_stability == doctest::Approx(-0.1));
    CHECK(rows[1].mean_delta_stability == doctest::Approx(0.1));
    CHECK(rows[2].mean_delta_stability == doctest::Approx(0.0));
    CHECK_THROWS(tradeoff_summary({}));
  }

  TEST_CASE("report lists every group") {
    std::vector<ExperimentRecord> rs;
    for (std::size_t s = 0; s < 3; ++s) {
      auto r = rec("mu=0.1", s, "svm", "refit", 0.7, 0.3);
      r.cv_estimate = 0.72 + 0.01 * static_cast<double>(s);
      r.delta = r.cv_estimate - r.validation_accuracy;
      rs.push_back(r);
    }
    const auto rep = make_report(rs);
    REQUIRE(rep.discrepancy.size() == 1);
    CHECK(rep.discrepancy[0].stats.mean == doctest::Approx(0.03));
    CHECK(rep.markdown.find("| tuning | d | mu=0.1 | svm_l2 | refit | 3 | 0.0300") !=
          std::string::npos);
    CHECK(rep.markdown.find("## Records") != std::string::npos);
    CHECK_THROWS_AS(make_report({}), DataError);
  }
}

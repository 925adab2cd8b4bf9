#include "decodecv/config.hpp"
#include "decodecv/dataset.hpp"
#include "decodecv/decoder.hpp"
#include "decodecv/evaluation.hpp"
#include "decodecv/harness.hpp"
#include "decodecv/report.hpp"
#include "decodecv/simulator.hpp"
#include "decodecv/splitters.hpp"
#include "decodecv/tuning.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace decodecv;

namespace {

Dataset dataset_from_arrays(Eigen::MatrixXd x, std::vector<int> labels,
                            std::optional<std::vector<int>> blocks, std::string name) {
  std::vector<int> b = blocks ? *blocks : std::vector<int>(labels.size(), 0);
  return make_dataset(std::move(x), std::move(labels), std::move(b), std::move(name));
}

DecoderSpec make_spec(const std::string& loss, const std::string& penalty, double C, double tol,
                      int max_iter, bool fit_intercept) {
  DecoderSpec s;
  s.loss = loss_from_string(loss);
  s.penalty = penalty_from_string(penalty);
  s.C = C;
  s.tol = tol;
  s.max_iter = max_iter;
  s.fit_intercept = fit_intercept;
  s.validate();
  return s;
}

py::list plan_to_list(const SplitPlan& plan) {
  py::list out;
  for (const auto& s : plan.splits) out.append(py::make_tuple(s.train, s.test));
  return out;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  write_records_csv(records, os);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-validation and tuning benchmarks for linear decoders";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("features"), py::arg("labels"),
           py::arg("blocks") = py::none(), py::arg("name") = "")
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("blocks", &Dataset::blocks)
      .def_readonly("name", &Dataset::name)
      .def_property_readonly("n_samples", &Dataset::n_samples)
      .def_property_readonly("n_features", &Dataset::n_features)
      .def_property_readonly("n_blocks", &Dataset::n_blocks)
      .def("subset", [](const Dataset& d, const std::vector<std::size_t>& idx) {
        return d.subset(idx);
      });

  m.def("read_csv", py::overload_cast<const std::filesystem::path&>(&read_csv), py::arg("path"));
  m.def("write_csv",
        py::overload_cast<const Dataset&, const std::filesystem::path&>(&write_csv),
        py::arg("data"), py::arg("path"));

  m.def(
      "simulate",
      [](double mu, std::size_t n_features, std::size_t n_train, std::size_t n_test,
         double smoothing_sigma, std::size_t n_blocks, std::uint64_t seed,
         const std::string& label_layout, bool independent_blocks) {
        SimulationConfig c;
        c.mu = mu;
        c.n_features = n_features;
        c.n_train = n_train;
        c.n_test = n_test;
        c.smoothing_sigma = smoothing_sigma;
        c.n_blocks = n_blocks;
        c.seed = seed;
        c.label_layout = label_layout_from_string(label_layout);
        c.independent_blocks = independent_blocks;
        auto data = generate(c);
        return py::make_tuple(std::move(data.train), std::move(data.test));
      },
      py::arg("mu") = 0.1, py::arg("n_features") = 100, py::arg("n_train") = 200,
      py::arg("n_test") = 10000, py::arg("smoothing_sigma") = 2.0, py::arg("n_blocks") = 10,
      py::arg("seed") = 0, py::arg("label_layout") = "runs",
      py::arg("independent_blocks") = true,
      "Two Gaussian classes with temporally smoothed noise; returns (train, test).");

  py::class_<DecoderSpec>(m, "DecoderSpec")
      .def(py::init(&make_spec), py::arg("loss") = "hinge", py::arg("penalty") = "l2",
           py::arg("C") = 1.0, py::arg("tol") = 1e-7, py::arg("max_iter") = 5000,
           py::arg("fit_intercept") = true)
      .def_property_readonly("loss", [](const DecoderSpec& s) { return to_string(s.loss); })
      .def_property_readonly("penalty",
                             [](const DecoderSpec& s) { return to_string(s.penalty); })
      .def_readonly("C", &DecoderSpec::C)
      .def_property_readonly("name", &DecoderSpec::name);

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("weights", &LinearModel::weights)
      .def_readonly("intercept", &LinearModel::intercept)
      .def("decision_function", &LinearModel::decision_function)
      .def("predict", [](const LinearModel& lm, const Dataset& d) { return predict(lm, d); });

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_readonly("weights", &TrainedModel::weights)
      .def_readonly("intercept", &TrainedModel::intercept)
      .def_readonly("objective", &TrainedModel::objective_value)
      .def_readonly("converged", &TrainedModel::converged)
      .def_readonly("iterations", &TrainedModel::iterations)
      .def("full_space", &TrainedModel::full_space)
      .def("decision_function",
           [](const TrainedModel& tm, const Dataset& d) { return decision_function(tm, d); })
      .def("predict", [](const TrainedModel& tm, const Dataset& d) { return predict(tm, d); })
      .def("to_json", [](const TrainedModel& tm) { return to_json(tm).dump(); });

  m.def(
      "train",
      [](const Dataset& d, const DecoderSpec& spec, bool normalize, double screen_fraction) {
        PreprocessOptions p{normalize, screen_fraction};
        py::gil_scoped_release release;
        return train(d, spec, p);
      },
      py::arg("data"), py::arg("spec") = DecoderSpec{}, py::arg("normalize") = false,
      py::arg("screen_fraction") = 1.0);

  m.def("accuracy", &accuracy);

  m.def("leave_one_sample_out", [](const Dataset& d) { return plan_to_list(leave_one_sample_out(d)); });
  m.def("leave_one_block_out", [](const Dataset& d) { return plan_to_list(leave_one_block_out(d)); });
  m.def(
      "shuffled_block_split",
      [](const Dataset& d, std::size_t n_splits, double test_fraction, std::uint64_t seed,
         bool stratify) {
        return plan_to_list(shuffled_block_split(d, n_splits, test_fraction, seed, stratify));
      },
      py::arg("data"), py::arg("n_splits") = 10, py::arg("test_fraction") = 0.2,
      py::arg("seed") = 0, py::arg("stratify") = false);
  m.def(
      "validation_split",
      [](const Dataset& d, std::size_t n_repeats, double fraction, std::uint64_t seed) {
        return plan_to_list(validation_split(d, n_repeats, fraction, seed));
      },
      py::arg("data"), py::arg("n_repeats") = 10, py::arg("validation_fraction") = 0.5,
      py::arg("seed") = 0);

  m.def(
      "cv_estimate",
      [](const Dataset& d, const std::string& strategy, const DecoderSpec& spec,
         std::uint64_t seed, bool normalize, double screen_fraction) {
        const auto s = splitter_from_string(strategy);
        const auto plan = make_plan(d, s, seed);
        PreprocessOptions p{normalize, screen_fraction};
        py::gil_scoped_release release;
        return cv_estimate(d, plan, spec, p).estimate;
      },
      py::arg("data"), py::arg("strategy") = "shuffle_10", py::arg("spec") = DecoderSpec{},
      py::arg("seed") = 0, py::arg("normalize") = false, py::arg("screen_fraction") = 1.0,
      "Mean test accuracy over the splits of `strategy` (loo_sample, loo_block, shuffle_<n>).");

  py::class_<TuningOutcome>(m, "TuningOutcome")
      .def_readonly("model", &TuningOutcome::model)
      .def_readonly("chosen_C", &TuningOutcome::chosen_C)
      .def_readonly("cv_estimate", &TuningOutcome::cv_estimate)
      .def_property_readonly("grid", [](const TuningOutcome& o) { return o.curve.grid; })
      .def_property_readonly("mean_curve",
                             [](const TuningOutcome& o) { return o.curve.mean_curve(); })
      .def("to_json", [](const TuningOutcome& o) { return to_json(o).dump(); });

  m.def(
      "tune",
      [](const Dataset& d, const std::string& strategy, const DecoderSpec& family,
         std::uint64_t seed, bool normalize, double screen_fraction, int jobs) {
        const auto s = strategy_from_string(strategy);
        PreprocessOptions p{normalize, screen_fraction};
        py::gil_scoped_release release;
        return tune(d, s, family, p, seed, jobs);
      },
      py::arg("decoding_set"), py::arg("strategy") = "refit", py::arg("family") = DecoderSpec{},
      py::arg("seed") = 0, py::arg("normalize") = false, py::arg("screen_fraction") = 1.0,
      py::arg("jobs") = 1, "Nested CV on the decoding set (refit, average or C=<value>).");

  m.def("default_C_grid", &default_C_grid);
  m.def(
      "stability",
      [](const std::vector<Eigen::VectorXd>& vs) {
        const auto r = stability(vs);
        return py::make_tuple(r.value, r.degenerate);
      },
      "Mean pairwise Pearson correlation; returns (value, degenerate).");
  m.def(
      "discrepancy",
      [](const std::vector<std::pair<double, double>>& pairs) {
        const auto s = discrepancy(pairs);
        py::dict out;
        out["mean"] = s.mean;
        out["median"] = s.median;
        out["q25"] = s.q25;
        out["q75"] = s.q75;
        out["p5"] = s.p5;
        out["p95"] = s.p95;
        return out;
      },
      "Summary of cv_estimate - validation_accuracy over (cv, validation) pairs.");

  m.def(
      "load_config",
      [](const std::filesystem::path& path) { return to_json(load_config(path)).dump(); },
      "Parses and validates a config file; returns its canonical JSON.");
  m.def("config_hash", [](const std::filesystem::path& path) {
    return config_hash(load_config(path));
  });

  m.def(
      "run_benchmark",
      [](const std::filesystem::path& config_path, const std::string& which,
         std::optional<std::filesystem::path> out, std::optional<std::size_t> repeats,
         int jobs, bool write_outputs) {
        auto c = load_config(config_path);
        if (out) c.output_dir = *out;
        if (repeats) c.repeats = *repeats;
        c.jobs = jobs;
        BenchmarkResult r;
        {
          py::gil_scoped_release release;
          if (which == "cv") {
            r = run_cv_benchmark(c, write_outputs);
          } else if (which == "tuning") {
            r = run_tuning_benchmark(c, write_outputs);
          } else {
            throw std::invalid_argument("benchmark must be 'cv' or 'tuning'");
          }
        }
        return records_to_csv(r.records);
      },
      py::arg("config"), py::arg("benchmark") = "cv", py::arg("out") = py::none(),
      py::arg("repeats") = py::none(), py::arg("jobs") = 1, py::arg("write_outputs") = false,
      "Runs a benchmark and returns the results table as CSV text.");

  m.def(
      "report",
      [](const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out) {
        return report_files(inputs, out).markdown;
      },
      py::arg("inputs"), py::arg("out_dir"));
}

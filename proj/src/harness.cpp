#include "decodecv/harness.hpp"

#include "decodecv/rng.hpp"
#include "decodecv/simulator.hpp"
#include "decodecv/tuning.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>

namespace decodecv {

using nlohmann::json;

namespace {

struct UnitOutput {
  std::vector<ExperimentRecord> records;
  std::vector<LinearModel> models;
  std::vector<json> outcomes;
};

json num_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double json_num(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json record_json(const ExperimentRecord& r) {
  return {{"benchmark", r.benchmark},
          {"dataset", r.dataset},
          {"task", r.task},
          {"validation_split", r.validation_split},
          {"decoder", r.decoder},
          {"penalty", r.penalty},
          {"strategy", r.strategy},
          {"cv_estimate", num_json(r.cv_estimate)},
          {"validation_accuracy", num_json(r.validation_accuracy)},
          {"delta", num_json(r.delta)},
          {"stability", num_json(r.stability)},
          {"chosen_C", r.chosen_C},
          {"runtime", num_json(r.runtime)},
          {"invalid_splits", r.invalid_splits},
          {"config_hash", r.config_hash},
          {"seed", r.seed}};
}

ExperimentRecord record_from_json(const json& j) {
  ExperimentRecord r;
  r.benchmark = j.at("benchmark").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.validation_split = j.at("validation_split").get<std::size_t>();
  r.decoder = j.at("decoder").get<std::string>();
  r.penalty = j.at("penalty").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  r.cv_estimate = json_num(j.at("cv_estimate"));
  r.validation_accuracy = json_num(j.at("validation_accuracy"));
  r.delta = json_num(j.at("delta"));
  r.stability = json_num(j.at("stability"));
  r.chosen_C = j.at("chosen_C").get<std::vector<double>>();
  r.runtime = json_num(j.at("runtime"));
  r.invalid_splits = j.at("invalid_splits").get<std::size_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

json unit_json(std::size_t index, const UnitOutput& u) {
  json j;
  j["unit"] = index;
  j["records"] = json::array();
  for (const auto& r : u.records) j["records"].push_back(record_json(r));
  j["models"] = json::array();
  for (const auto& m : u.models) j["models"].push_back(to_json(m));
  j["outcomes"] = u.outcomes;
  return j;
}

UnitOutput unit_from_json(const json& j) {
  UnitOutput u;
  for (const auto& r : j.at("records")) u.records.push_back(record_from_json(r));
  for (const auto& m : j.at("models")) {
    LinearModel lm;
    const auto w = m.at("weights").get<std::vector<double>>();
    lm.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    lm.intercept = m.at("intercept").get<double>();
    u.models.push_back(std::move(lm));
  }
  for (const auto& o : j.at("outcomes")) u.outcomes.push_back(o);
  return u;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_' || c == '=';
    out += ok ? c : '_';
  }
  return out;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Runs work units with resume support. Completed units are appended to a
// JSON-lines partial file (single writer under a lock); the returned
// vector is indexed by unit, so worker order never shows in the output.
std::vector<std::optional<UnitOutput>> run_units(
    const ExperimentConfig& config, const std::string& bench, std::size_t n_units,
    const std::function<UnitOutput(std::size_t)>& work, bool write_outputs,
    const ProgressFn& progress, bool& complete) {
  std::vector<std::optional<UnitOutput>> done(n_units);
  const auto hash = config_hash(config);
  const auto partial = config.output_dir / (bench + ".partial.jsonl");

  std::ofstream log;
  if (write_outputs) {
    std::filesystem::create_directories(config.output_dir);
    bool fresh = true;
    if (std::filesystem::exists(partial)) {
      std::ifstream in(partial);
      std::string line;
      if (std::getline(in, line)) {
        json head;
        try {
          head = json::parse(line);
        } catch (const json::parse_error&) {
          throw std::runtime_error(partial.string() + ": unreadable partial results");
        }
        if (head.value("config_hash", "") != hash) {
          throw std::runtime_error(partial.string() +
                                   ": partial results belong to a different config; "
                                   "remove the file to start over");
        }
        fresh = false;
        while (std::getline(in, line)) {
          json u;
          try {
            u = json::parse(line);
          } catch (const json::parse_error&) {
            break;  // torn final line from an interrupted write
          }
          const auto idx = u.at("unit").get<std::size_t>();
          if (idx < n_units) done[idx] = unit_from_json(u);
        }
      }
    }
    if (fresh) {
      std::ofstream head(partial, std::ios::binary | std::ios::trunc);
      head << json{{"config_hash", hash}, {"benchmark", bench}}.dump() << '\n';
    } else {
      // Rewrite without a possibly torn tail before appending.
      std::ofstream out(partial, std::ios::binary | std::ios::trunc);
      out << json{{"config_hash", hash}, {"benchmark", bench}}.dump() << '\n';
      for (std::size_t i = 0; i < n_units; ++i) {
        if (done[i]) out << unit_json(i, *done[i]).dump() << '\n';
      }
    }
    log.open(partial, std::ios::binary | std::ios::app);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n_units; ++i) {
    if (!done[i]) pending.push_back(i);
  }
  if (progress && pending.size() < n_units) {
    progress(bench + ": resuming, " + std::to_string(n_units - pending.size()) + "/" +
             std::to_string(n_units) + " units already done");
  }
  if (config.max_units && pending.size() > *config.max_units) pending.resize(*config.max_units);

  std::mutex mutex;
  std::size_t finished = n_units - std::count(done.begin(), done.end(), std::nullopt);
  parallel_for(pending.size(), config.jobs, [&](std::size_t k) {
    const auto idx = pending[k];
    UnitOutput out = work(idx);
    std::lock_guard lock(mutex);
    if (log.is_open()) log << unit_json(idx, out).dump() << '\n' << std::flush;
    done[idx] = std::move(out);
    ++finished;
    if (progress) {
      progress(bench + ": " + std::to_string(finished) + "/" + std::to_string(n_units));
    }
  });

  complete = std::none_of(done.begin(), done.end(), [](const auto& u) { return !u; });
  return done;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_results(const ExperimentConfig& config, const std::string& bench,
                   BenchmarkResult& result) {
  std::filesystem::create_directories(config.output_dir);
  auto cfg = to_json(config);
  cfg["config_hash"] = config_hash(config);
  write_json_file(config.output_dir / "config.json", cfg);
  result.csv_path = config.output_dir / (bench + ".csv");
  const auto tmp = config.output_dir / (bench + ".csv.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write_records_csv(result.records, out);
  }
  std::filesystem::rename(tmp, result.csv_path);
  std::filesystem::remove(config.output_dir / (bench + ".partial.jsonl"));
}

}  // namespace

std::string mu_task_name(double mu) { return "mu=" + format_double(mu); }

std::vector<TaskData> load_tasks(const ExperimentConfig& config) {
  std::vector<TaskData> tasks;
  if (config.simulation) {
    for (std::size_t t = 0; t < config.simulation->mu.size(); ++t) {
      auto sim = config.simulation->base;
      sim.mu = config.simulation->mu[t];
      sim.n_test = 2;  // only the training stream is used
      sim.seed = derive_seed(config.seed, {seed_task_data, t});
      auto data = generate(sim).train;
      data.name = "simulation";
      tasks.push_back({"simulation", mu_task_name(sim.mu), std::move(data)});
    }
    return tasks;
  }
  config.check_files();
  for (const auto& f : config.csv_files) {
    auto data = read_csv(f);
    data.validate();
    const auto stem = f.stem().string();
    tasks.push_back({stem, stem, std::move(data)});
  }
  return tasks;
}

BenchmarkResult run_cv_benchmark(const ExperimentConfig& config, bool write_outputs,
                                 const ProgressFn& progress) {
  config.validate();
  const auto hash = config_hash(config);
  const auto& spec = config.cv_decoder;
  const auto& strategies = config.cv_strategies;
  const bool simulated = config.simulation.has_value();

  // Imported data: tasks and their outer validation plans are fixed up front.
  std::vector<TaskData> tasks;
  std::vector<SplitPlan> validation_plans;
  std::size_t n_tasks = 0;
  std::size_t per_task = 0;
  if (simulated) {
    n_tasks = config.simulation->mu.size();
    per_task = config.repeats;
  } else {
    tasks = load_tasks(config);
    n_tasks = tasks.size();
    per_task = config.validation.n_splits;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      validation_plans.push_back(validation_split(
          tasks[t].data, config.validation.n_splits, config.validation.fraction,
          derive_seed(config.seed, {seed_validation, t}), config.validation.stratify));
    }
  }

  auto work = [&](std::size_t unit) {
    const auto t = unit / per_task;
    const auto r = unit % per_task;
    Dataset decoding;
    Dataset held_out;
    std::string dataset;
    std::string task;
    if (simulated) {
      auto sim = config.simulation->base;
      sim.mu = config.simulation->mu[t];
      sim.seed = derive_seed(config.seed, {seed_cv_data, t, r});
      auto data = generate(sim);
      decoding = std::move(data.train);
      held_out = std::move(data.test);
      dataset = "simulation";
      task = mu_task_name(sim.mu);
    } else {
      const auto& split = validation_plans[t].splits[r];
      decoding = tasks[t].data.subset(split.train);
      held_out = tasks[t].data.subset(split.test);
      dataset = tasks[t].dataset;
      task = tasks[t].task;
    }

    UnitOutput out;
    const auto t0 = std::chrono::steady_clock::now();
    const TrainedModel full = train(decoding, spec, config.preprocessing);
    const double truth = accuracy(predict(full, held_out), held_out.labels);
    const double truth_time = seconds_since(t0);
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      const auto t1 = std::chrono::steady_clock::now();
      const auto plan_seed = derive_seed(config.seed, {seed_cv_plan, t, r, s});
      const SplitPlan plan = make_plan(decoding, strategies[s], plan_seed);
      const CvResult cv = cv_estimate(decoding, plan, spec, config.preprocessing);
      ExperimentRecord rec;
      rec.benchmark = "cv";
      rec.dataset = dataset;
      rec.task = task;
      rec.validation_split = r;
      rec.decoder = spec.decoder_name();
      rec.penalty = to_string(spec.penalty);
      rec.strategy = strategies[s].name();
      rec.cv_estimate = cv.estimate;
      rec.validation_accuracy = truth;
      rec.delta = cv.estimate - truth;
      rec.chosen_C = {spec.C};
      if (config.record_runtime) rec.runtime = seconds_since(t1) + truth_time;
      rec.invalid_splits = cv.invalid_splits;
      rec.config_hash = hash;
      rec.seed = plan_seed;
      out.records.push_back(std::move(rec));
    }
    return out;
  };

  bool complete = false;
  const auto units = run_units(config, "cv_benchmark", n_tasks * per_task, work, write_outputs,
                               progress, complete);
  BenchmarkResult result;
  result.complete = complete;
  result.units_total = units.size();
  for (const auto& u : units) {
    if (!u) continue;
    ++result.units_done;
    result.records.insert(result.records.end(), u->records.begin(), u->records.end());
  }

  if (write_outputs && complete) {
    write_results(config, "cv_benchmark", result);
    // Example split plans: the first repeat of every task.
    for (std::size_t t = 0; t < n_tasks; ++t) {
      Dataset decoding;
      std::string task;
      if (simulated) {
        auto sim = config.simulation->base;
        sim.mu = config.simulation->mu[t];
        sim.n_test = 2;
        sim.seed = derive_seed(config.seed, {seed_cv_data, t, 0});
        decoding = generate(sim).train;
        task = mu_task_name(sim.mu);
      } else {
        decoding = tasks[t].data.subset(validation_plans[t].splits[0].train);
        task = tasks[t].task;
        write_json_file(config.output_dir / "splits" / (safe_name(task) + "_validation.json"),
                        to_json(validation_plans[t]));
      }
      for (std::size_t s = 0; s < strategies.size(); ++s) {
        const auto plan = make_plan(decoding, strategies[s],
                                    derive_seed(config.seed, {seed_cv_plan, t, 0, s}));
        write_json_file(config.output_dir / "splits" /
                            (safe_name(task) + "_" + strategies[s].name() + "_split0.json"),
                        to_json(plan));
      }
    }
  }
  return result;
}

BenchmarkResult run_tuning_benchmark(const ExperimentConfig& config, bool write_outputs,
                                     const ProgressFn& progress) {
  config.validate();
  const auto hash = config_hash(config);
  const auto tasks = load_tasks(config);
  const auto& decoders = config.decoders;
  const auto& strategies = config.strategies;
  const auto n_splits = config.validation.n_splits;

  std::vector<SplitPlan> validation_plans;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    validation_plans.push_back(validation_split(
        tasks[t].data, n_splits, config.validation.fraction,
        derive_seed(config.seed, {seed_validation, t}), config.validation.stratify));
  }

  // Strategies that search the grid share one grid run per (split, decoder).
  std::optional<std::size_t> grid_owner;
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    if (strategies[s].kind != StrategyKind::fixed && !grid_owner) grid_owner = s;
  }
  for (const auto& s : strategies) {
    if (s.kind != StrategyKind::fixed &&
        (s.grid != strategies[*grid_owner].grid ||
         s.inner.n_splits != strategies[*grid_owner].inner.n_splits ||
         s.inner.test_fraction != strategies[*grid_owner].inner.test_fraction ||
         s.inner.stratify != strategies[*grid_owner].inner.stratify)) {
      throw ConfigError("grid-search strategies must share the grid and inner splitter");
    }
  }

  auto work = [&](std::size_t unit) {
    const auto d = unit % decoders.size();
    const auto r = (unit / decoders.size()) % n_splits;
    const auto t = unit / (decoders.size() * n_splits);
    const auto& split = validation_plans[t].splits[r];
    // Everything up to model selection sees the decoding side only.
    const Dataset decoding = tasks[t].data.subset(split.train);
    const auto inner_seed = derive_seed(config.seed, {seed_inner, t, r});

    UnitOutput out;
    std::optional<GridRun> run;
    double grid_time = 0.0;
    if (grid_owner) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto inner_plan = make_plan(decoding, strategies[*grid_owner].inner, inner_seed);
      run = run_grid(decoding, decoders[d], strategies[*grid_owner].grid, inner_plan,
                     config.preprocessing, 1);
      grid_time = seconds_since(t0);
    }
    std::vector<TuningOutcome> outcomes;
    std::vector<double> times;
    for (const auto& s : strategies) {
      const auto t0 = std::chrono::steady_clock::now();
      outcomes.push_back(select(decoding, s, decoders[d], run ? &*run : nullptr,
                                config.preprocessing));
      times.push_back(seconds_since(t0) + (s.kind == StrategyKind::fixed ? 0.0 : grid_time));
    }

    const Dataset validation = tasks[t].data.subset(split.test);
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      const auto& o = outcomes[s];
      ExperimentRecord rec;
      rec.benchmark = "tuning";
      rec.dataset = tasks[t].dataset;
      rec.task = tasks[t].task;
      rec.validation_split = r;
      rec.decoder = decoders[d].decoder_name();
      rec.penalty = to_string(decoders[d].penalty);
      rec.strategy = strategies[s].name();
      rec.cv_estimate = o.cv_estimate;
      rec.validation_accuracy =
          accuracy(predict(o.model, validation), validation.labels);
      rec.delta = rec.cv_estimate - rec.validation_accuracy;
      rec.chosen_C = o.chosen_C;
      if (config.record_runtime) rec.runtime = times[s];
      rec.invalid_splits = o.curve.empty() ? 0 : o.curve.n_invalid();
      rec.config_hash = hash;
      rec.seed = inner_seed;
      out.records.push_back(std::move(rec));
      out.models.push_back(o.model);
      json oj = to_json(o);
      oj["strategy"] = strategies[s].name();
      out.outcomes.push_back(std::move(oj));
    }
    return out;
  };

  bool complete = false;
  const auto units = run_units(config, "tuning_benchmark",
                               tasks.size() * n_splits * decoders.size(), work, write_outputs,
                               progress, complete);
  BenchmarkResult result;
  result.complete = complete;
  result.units_total = units.size();
  std::vector<json> outcome_lines;
  for (const auto& u : units) {
    if (!u) continue;
    ++result.units_done;
    result.records.insert(result.records.end(), u->records.begin(), u->records.end());
    result.models.insert(result.models.end(), u->models.begin(), u->models.end());
    outcome_lines.insert(outcome_lines.end(), u->outcomes.begin(), u->outcomes.end());
  }
  if (!complete) return result;

  // Stability across validation splits for each (task, decoder, strategy).
  std::map<std::tuple<std::string, std::string, std::string, std::string, std::string>,
           std::vector<std::size_t>>
      groups;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    groups[{r.dataset, r.task, r.decoder, r.penalty, r.strategy}].push_back(i);
  }
  for (const auto& [key, idx] : groups) {
    if (idx.size() < 2) continue;
    std::vector<Eigen::VectorXd> weights;
    for (auto i : idx) weights.push_back(result.models[i].weights);
    const auto st = stability(weights);
    for (auto i : idx) result.records[i].stability = st.value;
  }

  if (write_outputs) {
    write_results(config, "tuning_benchmark", result);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      write_json_file(
          config.output_dir / "splits" / (safe_name(tasks[t].task) + "_validation.json"),
          to_json(validation_plans[t]));
    }
    std::ofstream out(config.output_dir / "tuning_outcomes.jsonl", std::ios::binary);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const auto& r = result.records[i];
      json line{{"dataset", r.dataset},       {"task", r.task},
                {"validation_split", r.validation_split}, {"decoder", r.decoder},
                {"penalty", r.penalty},       {"outcome", outcome_lines[i]}};
      out << line.dump() << '\n';
    }
  }
  return result;
}

}  // namespace decodecv

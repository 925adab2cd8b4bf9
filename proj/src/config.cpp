#include "decodecv/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace decodecv {

using nlohmann::json;

namespace {

// Error tied to a location inside the document (JSON pointer).
struct PathError {
  std::string pointer;
  std::string message;
};

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw PathError{pointer, message};
}

void check_keys(const json& j, const std::string& at, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(at, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(at + "/" + k, "unknown key '" + k + "'");
  }
}

double get_number(const json& j, const std::string& at) {
  if (!j.is_number()) fail(at, "expected a number");
  return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& at) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    fail(at, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& at) {
  if (!j.is_boolean()) fail(at, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& at) {
  if (!j.is_string()) fail(at, "expected a string");
  return j.get<std::string>();
}

const json& require_array(const json& j, const std::string& at) {
  if (!j.is_array()) fail(at, "expected a list");
  return j;
}

// Runs `f`, turning library validation errors into located errors.
template <typename F>
void located(const std::string& at, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    fail(at, e.what());
  }
}

SimulationSource parse_simulation(const json& j, const std::string& at) {
  check_keys(j, at,
             {"mu", "n_features", "n_train", "n_test", "smoothing_sigma", "n_blocks",
              "rescale_noise", "label_layout", "run_length", "independent_blocks"});
  SimulationSource s;
  if (j.contains("mu")) {
    s.mu.clear();
    const auto& mus = require_array(j["mu"], at + "/mu");
    for (std::size_t i = 0; i < mus.size(); ++i) {
      s.mu.push_back(get_number(mus[i], at + "/mu/" + std::to_string(i)));
    }
    if (s.mu.empty()) fail(at + "/mu", "needs at least one value");
  }
  auto& b = s.base;
  if (j.contains("n_features")) b.n_features = get_uint(j["n_features"], at + "/n_features");
  if (j.contains("n_train")) b.n_train = get_uint(j["n_train"], at + "/n_train");
  if (j.contains("n_test")) b.n_test = get_uint(j["n_test"], at + "/n_test");
  if (j.contains("smoothing_sigma")) {
    b.smoothing_sigma = get_number(j["smoothing_sigma"], at + "/smoothing_sigma");
  }
  if (j.contains("n_blocks")) b.n_blocks = get_uint(j["n_blocks"], at + "/n_blocks");
  if (j.contains("rescale_noise")) {
    b.rescale_noise = get_bool(j["rescale_noise"], at + "/rescale_noise");
  }
  if (j.contains("independent_blocks")) {
    b.independent_blocks = get_bool(j["independent_blocks"], at + "/independent_blocks");
  }
  if (j.contains("run_length")) b.run_length = get_uint(j["run_length"], at + "/run_length");
  if (j.contains("label_layout")) {
    const auto text = get_string(j["label_layout"], at + "/label_layout");
    located(at + "/label_layout", [&] { b.label_layout = label_layout_from_string(text); });
  }
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    auto cfg = b;
    cfg.mu = s.mu[i];
    located(at + "/mu/" + std::to_string(i), [&] { cfg.validate(); });
  }
  return s;
}

DecoderSpec parse_decoder(const json& j, const std::string& at) {
  check_keys(j, at, {"loss", "penalty", "C", "tol", "max_iter", "fit_intercept"});
  DecoderSpec d;
  if (j.contains("loss")) {
    const auto text = get_string(j["loss"], at + "/loss");
    located(at + "/loss", [&] { d.loss = loss_from_string(text); });
  }
  if (j.contains("penalty")) {
    const auto text = get_string(j["penalty"], at + "/penalty");
    located(at + "/penalty", [&] { d.penalty = penalty_from_string(text); });
  }
  if (j.contains("C")) d.C = get_number(j["C"], at + "/C");
  if (j.contains("tol")) d.tol = get_number(j["tol"], at + "/tol");
  if (j.contains("max_iter")) {
    d.max_iter = static_cast<int>(get_uint(j["max_iter"], at + "/max_iter"));
  }
  if (j.contains("fit_intercept")) {
    d.fit_intercept = get_bool(j["fit_intercept"], at + "/fit_intercept");
  }
  located(at, [&] { d.validate(); });
  return d;
}

// Maps every JSON pointer in a (syntactically valid) document to the line
// its value starts on.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : text_(text) {
    skip_ws();
    value("");
  }

  std::size_t line_of(std::string pointer) const {
    for (;;) {
      if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
      const auto cut = pointer.rfind('/');
      if (cut == std::string::npos) return 1;
      pointer.resize(cut);
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') ++line_;
      if (c != ' ' && c != '\n' && c != '\r' && c != '\t') break;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  void value(const std::string& pointer) {
    if (pos_ >= text_.size()) return;
    lines_.emplace(pointer, line_);
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const auto key = string_token();
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        value(pointer + "/" + key);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      std::size_t i = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        value(pointer + "/" + std::to_string(i++));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \n\r\t").find(text_[pos_]) ==
                                        std::string_view::npos) {
        ++pos_;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

ExperimentConfig parse(const json& j) {
  check_keys(j, "",
             {"name", "data", "repeats", "validation", "decoders", "cv_decoder",
              "strategies", "grid", "inner", "cv_strategies", "shuffle_test_fraction",
              "preprocessing", "seed", "output_dir", "jobs", "record_runtime",
              "max_units"});
  ExperimentConfig c;
  if (j.contains("name")) c.name = get_string(j["name"], "/name");

  if (!j.contains("data")) fail("", "missing required key 'data'");
  const auto& data = j["data"];
  check_keys(data, "/data", {"simulation", "csv"});
  if (data.contains("simulation") == data.contains("csv")) {
    fail("/data", "give exactly one of 'simulation' or 'csv'");
  }
  if (data.contains("simulation")) {
    c.simulation = parse_simulation(data["simulation"], "/data/simulation");
  } else {
    const auto& files = data["csv"];
    if (files.is_string()) {
      c.csv_files.emplace_back(files.get<std::string>());
    } else {
      require_array(files, "/data/csv");
      for (std::size_t i = 0; i < files.size(); ++i) {
        c.csv_files.emplace_back(get_string(files[i], "/data/csv/" + std::to_string(i)));
      }
    }
    if (c.csv_files.empty()) fail("/data/csv", "needs at least one file");
  }

  if (j.contains("repeats")) c.repeats = get_uint(j["repeats"], "/repeats");
  if (c.repeats == 0) fail("/repeats", "must be at least 1");

  if (j.contains("validation")) {
    const auto& v = j["validation"];
    check_keys(v, "/validation", {"n_splits", "fraction", "stratify"});
    if (v.contains("n_splits")) c.validation.n_splits = get_uint(v["n_splits"], "/validation/n_splits");
    if (v.contains("fraction")) c.validation.fraction = get_number(v["fraction"], "/validation/fraction");
    if (v.contains("stratify")) c.validation.stratify = get_bool(v["stratify"], "/validation/stratify");
    if (c.validation.n_splits == 0) fail("/validation/n_splits", "must be at least 1");
    if (!(c.validation.fraction > 0.0 && c.validation.fraction < 1.0)) {
      fail("/validation/fraction", "must lie in (0, 1)");
    }
  }

  if (j.contains("decoders")) {
    const auto& ds = require_array(j["decoders"], "/decoders");
    c.decoders.clear();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      c.decoders.push_back(parse_decoder(ds[i], "/decoders/" + std::to_string(i)));
    }
    if (c.decoders.empty()) fail("/decoders", "decoder list is empty");
  }
  if (j.contains("cv_decoder")) c.cv_decoder = parse_decoder(j["cv_decoder"], "/cv_decoder");

  std::vector<double> grid = default_C_grid();
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.is_array()) {
      grid.clear();
      for (std::size_t i = 0; i < g.size(); ++i) {
        grid.push_back(get_number(g[i], "/grid/" + std::to_string(i)));
      }
    } else {
      check_keys(g, "/grid", {"lo", "hi", "n"});
      const double lo = g.contains("lo") ? get_number(g["lo"], "/grid/lo") : 1e-5;
      const double hi = g.contains("hi") ? get_number(g["hi"], "/grid/hi") : 1e5;
      const auto n = g.contains("n") ? get_uint(g["n"], "/grid/n") : 11;
      located("/grid", [&] { grid = log_grid(lo, hi, n); });
    }
  }
  SplitterSpec inner{SplitterKind::shuffled_block, 10, 0.2, false};
  if (j.contains("inner")) {
    const auto& in = j["inner"];
    check_keys(in, "/inner", {"n_splits", "test_fraction", "stratify"});
    if (in.contains("n_splits")) inner.n_splits = get_uint(in["n_splits"], "/inner/n_splits");
    if (in.contains("test_fraction")) {
      inner.test_fraction = get_number(in["test_fraction"], "/inner/test_fraction");
    }
    if (in.contains("stratify")) inner.stratify = get_bool(in["stratify"], "/inner/stratify");
    located("/inner", [&] { inner.validate(); });
  }
  if (j.contains("strategies")) {
    const auto& ss = require_array(j["strategies"], "/strategies");
    c.strategies.clear();
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const auto at = "/strategies/" + std::to_string(i);
      const auto text = get_string(ss[i], at);
      located(at, [&] { c.strategies.push_back(strategy_from_string(text)); });
    }
    if (c.strategies.empty()) fail("/strategies", "strategy list is empty");
  }
  for (std::size_t i = 0; i < c.strategies.size(); ++i) {
    auto& s = c.strategies[i];
    if (s.kind != StrategyKind::fixed) {
      s.grid = grid;
      s.inner = inner;
    }
    located("/strategies/" + std::to_string(i), [&] { s.validate(); });
  }

  double shuffle_fraction = 0.2;
  if (j.contains("shuffle_test_fraction")) {
    shuffle_fraction = get_number(j["shuffle_test_fraction"], "/shuffle_test_fraction");
  }
  if (j.contains("cv_strategies")) {
    const auto& cs = require_array(j["cv_strategies"], "/cv_strategies");
    c.cv_strategies.clear();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto at = "/cv_strategies/" + std::to_string(i);
      const auto text = get_string(cs[i], at);
      located(at, [&] { c.cv_strategies.push_back(splitter_from_string(text, shuffle_fraction)); });
    }
    if (c.cv_strategies.empty()) fail("/cv_strategies", "cv strategy list is empty");
  } else {
    for (auto& s : c.cv_strategies) s.test_fraction = shuffle_fraction;
  }
  for (std::size_t i = 0; i < c.cv_strategies.size(); ++i) {
    located("/cv_strategies/" + std::to_string(i), [&] { c.cv_strategies[i].validate(); });
  }

  if (j.contains("preprocessing")) {
    const auto& p = j["preprocessing"];
    check_keys(p, "/preprocessing", {"variance_normalization", "screen_fraction"});
    if (p.contains("variance_normalization")) {
      c.preprocessing.normalize =
          get_bool(p["variance_normalization"], "/preprocessing/variance_normalization");
    }
    if (p.contains("screen_fraction")) {
      c.preprocessing.screen_fraction =
          get_number(p["screen_fraction"], "/preprocessing/screen_fraction");
    }
    located("/preprocessing", [&] { c.preprocessing.validate(); });
  }

  if (j.contains("seed")) c.seed = get_uint(j["seed"], "/seed");
  if (j.contains("output_dir")) c.output_dir = get_string(j["output_dir"], "/output_dir");
  if (j.contains("jobs")) {
    const auto jobs = get_uint(j["jobs"], "/jobs");
    if (jobs == 0) fail("/jobs", "must be at least 1");
    c.jobs = static_cast<int>(jobs);
  }
  if (j.contains("record_runtime")) c.record_runtime = get_bool(j["record_runtime"], "/record_runtime");
  if (j.contains("max_units") && !j["max_units"].is_null()) {
    c.max_units = get_uint(j["max_units"], "/max_units");
  }
  return c;
}

std::string pointer_label(const std::string& pointer) {
  return pointer.empty() ? std::string("config") : pointer.substr(1);
}

}  // namespace

ExperimentConfig::ExperimentConfig()
    : decoders(default_decoders()),
      strategies(default_strategies()),
      cv_strategies(default_cv_strategies()) {}

void ExperimentConfig::validate() const {
  if (simulation.has_value() == !csv_files.empty()) {
    throw ConfigError("config needs exactly one data source (simulation or csv)");
  }
  if (decoders.empty()) throw ConfigError("decoder list is empty");
  if (strategies.empty()) throw ConfigError("strategy list is empty");
  if (cv_strategies.empty()) throw ConfigError("cv strategy list is empty");
  if (repeats == 0) throw ConfigError("repeats must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (validation.n_splits == 0 || !(validation.fraction > 0.0 && validation.fraction < 1.0)) {
    throw ConfigError("validation needs n_splits >= 1 and a fraction in (0, 1)");
  }
  try {
    cv_decoder.validate();
    for (const auto& d : decoders) d.validate();
    for (const auto& s : strategies) s.validate();
    for (const auto& s : cv_strategies) s.validate();
    preprocessing.validate();
    if (simulation) {
      for (double mu : simulation->mu) {
        auto cfg = simulation->base;
        cfg.mu = mu;
        cfg.validate();
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::check_files() const {
  for (const auto& f : csv_files) {
    if (!std::filesystem::is_regular_file(f)) {
      throw ConfigError("data file not found: " + f.string());
    }
  }
}

std::vector<DecoderSpec> default_decoders() {
  std::vector<DecoderSpec> out;
  for (auto loss : {Loss::hinge, Loss::logistic}) {
    for (auto penalty : {Penalty::l1, Penalty::l2}) {
      DecoderSpec d;
      d.loss = loss;
      d.penalty = penalty;
      out.push_back(d);
    }
  }
  return out;
}

std::vector<TuningStrategy> default_strategies() {
  return {TuningStrategy::refit(), TuningStrategy::average(), TuningStrategy::fixed(1.0),
          TuningStrategy::fixed(1000.0)};
}

std::vector<SplitterSpec> default_cv_strategies() {
  return {{SplitterKind::leave_one_sample_out, 0, 0.2, false},
          {SplitterKind::leave_one_block_out, 0, 0.2, false},
          {SplitterKind::shuffled_block, 3, 0.2, false},
          {SplitterKind::shuffled_block, 10, 0.2, false},
          {SplitterKind::shuffled_block, 50, 0.2, false}};
}

TuningStrategy strategy_from_string(const std::string& text) {
  if (text == "refit") return TuningStrategy::refit();
  if (text == "average") return TuningStrategy::average();
  if (text.rfind("C=", 0) == 0) {
    double c = 0.0;
    const char* b = text.data() + 2;
    const char* e = text.data() + text.size();
    const auto [p, ec] = std::from_chars(b, e, c);
    if (ec == std::errc{} && p == e) {
      auto s = TuningStrategy::fixed(c);
      s.validate();
      return s;
    }
  }
  throw std::invalid_argument("unknown tuning strategy '" + text +
                              "' (expected refit, average or C=<value>)");
}

SplitterSpec splitter_from_string(const std::string& text, double test_fraction) {
  if (text == "loo_sample") return {SplitterKind::leave_one_sample_out, 0, test_fraction, false};
  if (text == "loo_block") return {SplitterKind::leave_one_block_out, 0, test_fraction, false};
  if (text.rfind("shuffle_", 0) == 0) {
    std::size_t n = 0;
    const char* b = text.data() + 8;
    const char* e = text.data() + text.size();
    const auto [p, ec] = std::from_chars(b, e, n);
    if (ec == std::errc{} && p == e && n > 0) {
      return {SplitterKind::shuffled_block, n, test_fraction, false};
    }
  }
  throw std::invalid_argument("unknown cv strategy '" + text +
                              "' (expected loo_sample, loo_block or shuffle_<n>)");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    return parse(j);
  } catch (const PathError& e) {
    throw ConfigError(pointer_label(e.pointer) + ": " + e.message);
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line number.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto > 0 ? upto - 1 : 0), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  try {
    return parse(j);
  } catch (const PathError& e) {
    const LineIndex index(text);
    throw ConfigError(source + ":" + std::to_string(index.line_of(e.pointer)) + ": " +
                      pointer_label(e.pointer) + ": " + e.message);
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str(), path.string());
  const auto base = path.parent_path();
  for (auto& f : c.csv_files) {
    if (f.is_relative()) f = base / f;
  }
  return c;
}

namespace {

json identity_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  if (c.simulation) {
    const auto& b = c.simulation->base;
    j["data"]["simulation"] = {{"mu", c.simulation->mu},
                               {"n_features", b.n_features},
                               {"n_train", b.n_train},
                               {"n_test", b.n_test},
                               {"smoothing_sigma", b.smoothing_sigma},
                               {"n_blocks", b.n_blocks},
                               {"rescale_noise", b.rescale_noise},
                               {"label_layout", to_string(b.label_layout)},
                               {"run_length", b.run_length},
                               {"independent_blocks", b.independent_blocks}};
  } else {
    auto files = json::array();
    for (const auto& f : c.csv_files) files.push_back(f.generic_string());
    j["data"]["csv"] = files;
  }
  j["repeats"] = c.repeats;
  j["validation"] = {{"n_splits", c.validation.n_splits},
                     {"fraction", c.validation.fraction},
                     {"stratify", c.validation.stratify}};
  j["decoders"] = json::array();
  for (const auto& d : c.decoders) j["decoders"].push_back(to_json(d));
  j["cv_decoder"] = to_json(c.cv_decoder);
  // Same layout as the input format, so the sidecar can be fed back in.
  std::vector<double> grid = default_C_grid();
  SplitterSpec inner{SplitterKind::shuffled_block, 10, 0.2, false};
  j["strategies"] = json::array();
  for (const auto& s : c.strategies) {
    j["strategies"].push_back(s.name());
    if (s.kind != StrategyKind::fixed) {
      grid = s.grid;
      inner = s.inner;
    }
  }
  j["grid"] = grid;
  j["inner"] = {{"n_splits", inner.n_splits},
                {"test_fraction", inner.test_fraction},
                {"stratify", inner.stratify}};
  j["cv_strategies"] = json::array();
  for (const auto& s : c.cv_strategies) j["cv_strategies"].push_back(s.name());
  j["shuffle_test_fraction"] = c.cv_strategies.empty() ? 0.2 : c.cv_strategies.front().test_fraction;
  j["preprocessing"] = {{"variance_normalization", c.preprocessing.normalize},
                        {"screen_fraction", c.preprocessing.screen_fraction}};
  j["seed"] = c.seed;
  j["record_runtime"] = c.record_runtime;
  return j;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  auto j = identity_json(c);
  j["output_dir"] = c.output_dir.generic_string();
  j["jobs"] = c.jobs;
  j["max_units"] = c.max_units ? json(*c.max_units) : json(nullptr);
  return j;
}

std::string canonical_dump(const ExperimentConfig& config) {
  return identity_json(config).dump();
}

std::string config_hash(const ExperimentConfig& config) {
  // 64-bit FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_dump(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace decodecv

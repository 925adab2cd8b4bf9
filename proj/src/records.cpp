#include "decodecv/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace decodecv {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "benchmark",      "dataset",   "task",        "validation_split", "decoder",
      "penalty",        "strategy",  "cv_estimate", "validation_accuracy", "delta",
      "stability",      "chosen_C",  "runtime",     "invalid_splits",   "config_hash",
      "seed"};
  return cols;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return std::isnan(v) ? std::string{} : format_double(v); }

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_num(const std::string& s, std::size_t line) {
  if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  if (s.empty()) return 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace

void write_records_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    std::string chosen;
    for (std::size_t i = 0; i < r.chosen_C.size(); ++i) {
      if (i) chosen += ';';
      chosen += format_double(r.chosen_C[i]);
    }
    out << quote(r.benchmark) << ',' << quote(r.dataset) << ',' << quote(r.task) << ','
        << r.validation_split << ',' << quote(r.decoder) << ',' << quote(r.penalty) << ','
        << quote(r.strategy) << ',' << num(r.cv_estimate) << ','
        << num(r.validation_accuracy) << ',' << num(r.delta) << ',' << num(r.stability)
        << ',' << chosen << ',' << num(r.runtime) << ',' << r.invalid_splits << ','
        << quote(r.config_hash) << ',' << r.seed << '\n';
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("results table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
  for (const auto& c : record_columns()) {
    if (!pos.count(c)) throw DataError("results table is missing column '" + c + "'");
  }

  std::vector<ExperimentRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_row(line);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(f.size()));
    }
    const auto get = [&](const char* c) -> const std::string& { return f[pos.at(c)]; };
    ExperimentRecord r;
    r.benchmark = get("benchmark");
    r.dataset = get("dataset");
    r.task = get("task");
    r.validation_split = parse_uint(get("validation_split"), line_no);
    r.decoder = get("decoder");
    r.penalty = get("penalty");
    r.strategy = get("strategy");
    r.cv_estimate = parse_num(get("cv_estimate"), line_no);
    r.validation_accuracy = parse_num(get("validation_accuracy"), line_no);
    r.delta = parse_num(get("delta"), line_no);
    r.stability = parse_num(get("stability"), line_no);
    std::stringstream cs(get("chosen_C"));
    std::string item;
    while (std::getline(cs, item, ';')) {
      if (!item.empty()) r.chosen_C.push_back(parse_num(item, line_no));
    }
    r.runtime = parse_num(get("runtime"), line_no);
    r.invalid_splits = parse_uint(get("invalid_splits"), line_no);
    r.config_hash = get("config_hash");
    r.seed = parse_uint(get("seed"), line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace decodecv

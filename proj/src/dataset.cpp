#include "decodecv/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace decodecv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError("line " + std::to_string(line_no) +
                    ": cannot parse feature value '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": non-finite feature value '" +
                    text + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::vector<int> Dataset::block_order() const {
  std::vector<int> order;
  std::set<int> seen;
  for (int b : blocks) {
    if (seen.insert(b).second) order.push_back(b);
  }
  return order;
}

std::size_t Dataset::n_positive() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), 1));
}

void Dataset::validate() const {
  const auto n = labels.size();
  if (static_cast<std::size_t>(features.rows()) != n || blocks.size() != n) {
    throw DataError("features, labels and blocks must have the same length");
  }
  if (n < 2) throw DataError("a dataset needs at least 2 samples");
  for (int y : labels) {
    if (y != 1 && y != -1) throw DataError("labels must be -1 or +1");
  }
  if (!has_both_classes()) {
    throw DataError("labels must contain exactly two distinct values");
  }
  for (int b : blocks) {
    if (b < 0 || static_cast<std::size_t>(b) >= block_names.size()) {
      throw DataError("block id out of range");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()),
                      features.cols());
  out.labels.reserve(indices.size());
  out.blocks.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    if (i >= n_samples()) throw DataError("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(k)) =
        features.row(static_cast<Eigen::Index>(i));
    out.labels.push_back(labels[i]);
    out.blocks.push_back(blocks[i]);
  }
  out.block_names = block_names;
  out.label_names = label_names;
  out.name = name;
  return out;
}

Dataset make_dataset(Eigen::MatrixXd features, std::vector<int> labels,
                     std::vector<int> blocks, std::string name) {
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.blocks = std::move(blocks);
  int max_block = -1;
  for (int b : d.blocks) max_block = std::max(max_block, b);
  for (int b = 0; b <= max_block; ++b) d.block_names.push_back(std::to_string(b));
  d.name = std::move(name);
  d.validate();
  return d;
}

Dataset read_csv(std::istream& in, std::string name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  std::map<std::size_t, std::size_t> feature_cols;  // feature index -> column
  std::size_t label_col = header.size();
  std::size_t block_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto h = trim(header[c]);
    if (h == "label") {
      label_col = c;
    } else if (h == "block") {
      block_col = c;
    } else if (h.size() > 1 && h[0] == 'f') {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), idx);
      if (ec != std::errc() || ptr != h.data() + h.size()) {
        throw DataError("line 1: unexpected column '" + h + "'");
      }
      if (!feature_cols.emplace(idx, c).second) {
        throw DataError("line 1: duplicate column '" + h + "'");
      }
    } else {
      throw DataError("line 1: unexpected column '" + h + "'");
    }
  }
  if (label_col == header.size()) throw DataError("line 1: missing column 'label'");
  if (block_col == header.size()) throw DataError("line 1: missing column 'block'");
  const std::size_t d = feature_cols.size();
  for (std::size_t j = 0; j < d; ++j) {
    if (!feature_cols.count(j)) {
      throw DataError("line 1: missing column 'f" + std::to_string(j) + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::vector<std::string> raw_blocks;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = parse_double(trim(fields[feature_cols[j]]), line_no);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(trim(fields[label_col]));
    raw_blocks.push_back(trim(fields[block_col]));
  }

  const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() != 2) {
    throw DataError("label column must contain exactly two distinct values, found " +
                    std::to_string(distinct.size()));
  }

  Dataset data;
  data.name = std::move(name);
  data.label_names = {*distinct.begin(), *std::next(distinct.begin())};
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(d));
  std::unordered_map<std::string, int> block_ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
    data.labels.push_back(raw_labels[i] == data.label_names[0] ? -1 : 1);
    auto [it, inserted] =
        block_ids.emplace(raw_blocks[i], static_cast<int>(data.block_names.size()));
    if (inserted) data.block_names.push_back(raw_blocks[i]);
    data.blocks.push_back(it->second);
  }
  data.validate();
  return data;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_csv(in, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_csv(const Dataset& data, std::ostream& out) {
  const auto d = data.n_features();
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label,block\n";
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out << format_double(data.features(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j)))
          << ',';
    }
    out << data.label_names[data.labels[i] == 1 ? 1 : 0] << ','
        << data.block_names[static_cast<std::size_t>(data.blocks[i])] << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(data, out);
}

}  // namespace decodecv

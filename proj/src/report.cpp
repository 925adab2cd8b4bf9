#include "decodecv/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace decodecv {

namespace {

std::string fixed4(double v) {
  if (std::isnan(v)) return "";
  if (std::abs(v) < 5e-5) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string exact(double v) { return std::isnan(v) ? std::string{} : format_double(v); }

std::string join_C(const std::vector<double>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i) out += ';';
    out += format_double(cs[i]);
  }
  return out;
}

}  // namespace

std::vector<DiscrepancyRow> discrepancy_table(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string,
                         std::string>;
  std::map<Key, std::vector<double>> groups;
  std::vector<Key> order;
  for (const auto& r : records) {
    if (std::isnan(r.delta)) continue;
    const Key k{r.benchmark, r.dataset, r.task, r.decoder, r.penalty, r.strategy};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(r.delta);
  }
  std::vector<DiscrepancyRow> rows;
  for (const auto& k : order) {
    DiscrepancyRow row;
    std::tie(row.benchmark, row.dataset, row.task, row.decoder, row.penalty, row.strategy) = k;
    row.stats = summarize(groups[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_discrepancy_csv(const std::vector<DiscrepancyRow>& rows, std::ostream& out) {
  out << "benchmark,dataset,task,decoder,penalty,strategy,n,mean,median,q25,q75,p5,p95\n";
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out << r.benchmark << ',' << r.dataset << ',' << r.task << ',' << r.decoder << ','
        << r.penalty << ',' << r.strategy << ',' << s.deltas.size() << ',' << exact(s.mean)
        << ',' << exact(s.median) << ',' << exact(s.q25) << ',' << exact(s.q75) << ','
        << exact(s.p5) << ',' << exact(s.p95) << '\n';
  }
}

void write_tradeoff_csv(const std::vector<TradeoffRow>& rows, std::ostream& out) {
  out << "decoder,penalty,strategy,n,mean_delta_accuracy,q25_delta_accuracy,"
         "q75_delta_accuracy,mean_delta_stability,q25_delta_stability,q75_delta_stability\n";
  for (const auto& r : rows) {
    out << r.decoder << ',' << r.penalty << ',' << r.strategy << ',' << r.n << ','
        << exact(r.mean_delta_accuracy) << ',' << exact(r.q25_delta_accuracy) << ','
        << exact(r.q75_delta_accuracy) << ',' << exact(r.mean_delta_stability) << ','
        << exact(r.q25_delta_stability) << ',' << exact(r.q75_delta_stability) << '\n';
  }
}

Report make_report(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw DataError("results table has no records");
  Report rep;
  rep.discrepancy = discrepancy_table(records);
  std::vector<ExperimentRecord> tuning;
  for (const auto& r : records) {
    if (r.benchmark == "tuning") tuning.push_back(r);
  }
  if (!tuning.empty()) rep.tradeoff = tradeoff_summary(tuning);

  std::ostringstream md;
  md << "# Decoding benchmark report\n\n";
  md << records.size() << " records";
  if (!records.front().config_hash.empty()) md << ", config " << records.front().config_hash;
  md << ".\n\n";

  if (!rep.discrepancy.empty()) {
    md << "## Cross-validation minus held-out accuracy\n\n";
    md << "| benchmark | dataset | task | decoder | strategy | n | mean | median | q25 | q75 "
          "| p5 | p95 |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rep.discrepancy) {
      const auto& s = r.stats;
      md << "| " << r.benchmark << " | " << r.dataset << " | " << r.task << " | " << r.decoder
         << '_' << r.penalty << " | " << r.strategy << " | " << s.deltas.size() << " | "
         << fixed4(s.mean) << " | " << fixed4(s.median) << " | " << fixed4(s.q25) << " | "
         << fixed4(s.q75) << " | " << fixed4(s.p5) << " | " << fixed4(s.p95) << " |\n";
    }
    md << '\n';
  }

  if (!rep.tradeoff.empty()) {
    md << "## Tuning strategies relative to the per-split mean\n\n";
    md << "| decoder | strategy | n | mean d_acc | q25 | q75 | mean d_stab | q25 | q75 |\n";
    md << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rep.tradeoff) {
      md << "| " << r.decoder << '_' << r.penalty << " | " << r.strategy << " | " << r.n
         << " | " << fixed4(r.mean_delta_accuracy) << " | " << fixed4(r.q25_delta_accuracy)
         << " | " << fixed4(r.q75_delta_accuracy) << " | " << fixed4(r.mean_delta_stability)
         << " | " << fixed4(r.q25_delta_stability) << " | " << fixed4(r.q75_delta_stability)
         << " |\n";
    }
    md << '\n';

    // Raw means, for reading absolute levels next to the deltas.
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> raw;
    std::vector<Key> order;
    for (const auto& r : tuning) {
      const Key k{r.decoder, r.penalty, r.strategy};
      auto [it, inserted] = raw.try_emplace(k);
      if (inserted) order.push_back(k);
      it->second.first.push_back(r.validation_accuracy);
      if (!std::isnan(r.stability)) it->second.second.push_back(r.stability);
    }
    md << "| decoder | strategy | mean validation accuracy | mean stability |\n";
    md << "|---|---|---|---|\n";
    for (const auto& k : order) {
      const auto& [acc, stab] = raw[k];
      const auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      md << "| " << std::get<0>(k) << '_' << std::get<1>(k) << " | " << std::get<2>(k)
         << " | " << fixed4(mean(acc)) << " | " << fixed4(mean(stab)) << " |\n";
    }
    md << '\n';
  }

  if (records.size() <= 20) {
    md << "## Records\n\n";
    const auto& cols = record_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) md << (i ? " | " : "| ") << cols[i];
    md << " |\n";
    for (std::size_t i = 0; i < cols.size(); ++i) md << "|---";
    md << "|\n";
    for (const auto& r : records) {
      md << "| " << r.benchmark << " | " << r.dataset << " | " << r.task << " | "
         << r.validation_split << " | " << r.decoder << " | " << r.penalty << " | "
         << r.strategy << " | " << exact(r.cv_estimate) << " | "
         << exact(r.validation_accuracy) << " | " << exact(r.delta) << " | "
         << exact(r.stability) << " | " << join_C(r.chosen_C) << " | " << exact(r.runtime)
         << " | " << r.invalid_splits << " | " << r.config_hash << " | " << r.seed << " |\n";
    }
    md << '\n';
  }
  rep.markdown = md.str();
  return rep;
}

Report report_files(const std::vector<std::filesystem::path>& inputs,
                    const std::filesystem::path& out_dir) {
  std::vector<ExperimentRecord> records;
  for (const auto& p : inputs) {
    std::ifstream in(p);
    if (!in) throw DataError(p.string() + ": cannot open results file");
    try {
      auto part = read_records_csv(in);
      records.insert(records.end(), part.begin(), part.end());
    } catch (const DataError& e) {
      throw DataError(p.string() + ": " + e.what());
    }
  }
  auto rep = make_report(records);
  std::filesystem::create_directories(out_dir);
  std::ofstream(out_dir / "report.md", std::ios::binary) << rep.markdown;
  std::ofstream disc(out_dir / "discrepancy.csv", std::ios::binary);
  write_discrepancy_csv(rep.discrepancy, disc);
  std::ofstream trade(out_dir / "tradeoff.csv", std::ios::binary);
  write_tradeoff_csv(rep.tradeoff, trade);
  return rep;
}

}  // namespace decodecv

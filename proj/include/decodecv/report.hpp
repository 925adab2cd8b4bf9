#pragma once

#include "decodecv/evaluation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace decodecv {

// Discrepancy statistics for one (benchmark, dataset, task, decoder,
// penalty, strategy) group.
struct DiscrepancyRow {
  std::string benchmark;
  std::string dataset;
  std::string task;
  std::string decoder;
  std::string penalty;
  std::string strategy;
  DiscrepancyStats stats;
};

std::vector<DiscrepancyRow> discrepancy_table(const std::vector<ExperimentRecord>& records);

struct Report {
  std::string markdown;
  std::vector<DiscrepancyRow> discrepancy;
  std::vector<TradeoffRow> tradeoff;  // tuning records only
};

Report make_report(const std::vector<ExperimentRecord>& records);

void write_discrepancy_csv(const std::vector<DiscrepancyRow>& rows, std::ostream& out);
void write_tradeoff_csv(const std::vector<TradeoffRow>& rows, std::ostream& out);

// Reads one or more results CSVs and writes report.md, discrepancy.csv and
// tradeoff.csv into `out_dir`.
Report report_files(const std::vector<std::filesystem::path>& inputs,
                    const std::filesystem::path& out_dir);

}  // namespace decodecv

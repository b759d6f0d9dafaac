#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cirisk/compromise.hpp"
#include "cirisk/risk.hpp"

namespace cirisk {

// numeric CSV with an optional non-numeric header row; rectangular rows required
struct CsvTable {
  std::vector<std::string> columns;            // empty when no header present
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);
Eigen::MatrixXd to_matrix(const CsvTable& table);
Eigen::VectorXd to_vector(const CsvTable& table);  // single-column tables

// "1,0,2.5" -> {1, 0, 2.5}
std::vector<double> parse_double_list(const std::string& text);

// key = value lines, '#' comments; later keys override earlier ones
std::map<std::string, std::string> read_kv_config(const std::string& path);

// FNV-1a; stamped into output headers so artifacts name their inputs
uint64_t fnv1a64(std::string_view text);
std::string provenance_line(const std::string& config_summary, uint64_t seed);

void write_risk_curve_csv(std::ostream& os, const RiskCurve& curve,
                          const std::string& provenance);
void write_dominance_report_jsonl(std::ostream& os,
                                  const DominanceSearchReport& report,
                                  const std::string& provenance);
void write_bs_sample_csv(std::ostream& os, const BSFunctions& bs,
                         int points_per_segment,
                         const std::string& provenance);

}  // namespace cirisk

#include "cirisk/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cirisk/errors.hpp"
#include "cirisk/version.hpp"

namespace cirisk {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  CsvTable table;
  std::string line;
  size_t width = 0;
  bool first = true;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> fields = split(t, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (size_t i = 0; i < fields.size(); ++i)
      if (!parse_number(fields[i], row[i])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (first) {
        table.columns = fields;
        first = false;
        continue;
      }
      std::ostringstream msg;
      msg << path << ":" << line_no << ": non-numeric field in data row";
      throw InputError(msg.str());
    }
    first = false;
    if (width == 0) width = row.size();
    if (row.size() != width) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << width
          << " fields, found " << row.size();
      throw InputError(msg.str());
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw InputError(path + ": no data rows");
  return table;
}

Eigen::MatrixXd to_matrix(const CsvTable& table) {
  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(table.rows.front().size());
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      X(i, j) = table.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return X;
}

Eigen::VectorXd to_vector(const CsvTable& table) {
  if (table.rows.front().size() != 1)
    throw InputError("expected a single-column table");
  Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = table.rows[static_cast<size_t>(i)][0];
  return v;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& f : split(text, ',')) {
    double v;
    if (!parse_number(f, v))
      throw InputError("cannot parse number in list: '" + f + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

std::map<std::string, std::string> read_kv_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected 'key = value'";
      throw InputError(msg.str());
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": empty key";
      throw InputError(msg.str());
    }
    kv[key] = value;
  }
  return kv;
}

uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string provenance_line(const std::string& config_summary, uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_summary)));
  std::ostringstream os;
  os << "# cirisk " << kVersion << " config=" << buf << " seed=" << seed;
  return os.str();
}

void write_risk_curve_csv(std::ostream& os, const RiskCurve& curve,
                          const std::string& provenance) {
  if (!provenance.empty()) os << provenance << "\n";
  os << "gamma,r1,r2,coverage,scaled_length\n";
  for (const RiskPoint& p : curve.points)
    os << fmt(p.gamma) << ',' << fmt(p.r1) << ',' << fmt(p.r2) << ','
       << fmt(p.coverage) << ',' << fmt(p.scaled_length) << "\n";
}

void write_dominance_report_jsonl(std::ostream& os,
                                  const DominanceSearchReport& report,
                                  const std::string& provenance) {
  nlohmann::json head;
  head["record"] = "header";
  if (!provenance.empty()) head["provenance"] = provenance;
  head["lambda_star"] = report.calib.lambda;
  head["ell_star"] = report.calib.ell;
  head["rho"] = report.rho;
  head["alpha"] = report.alpha;
  head["m"] = report.m;
  head["seed"] = report.seed;
  head["n_gamma"] = report.gamma_grid.size();
  head["gamma_max"] =
      report.gamma_grid.empty() ? 0.0 : report.gamma_grid.back();
  os << head.dump() << "\n";
  for (const CandidateRecord& r : report.records) {
    nlohmann::json j;
    j["record"] = "candidate";
    j["id"] = r.id;
    j["dominates"] = r.verdict.dominates;
    j["covers_everywhere"] = r.verdict.covers_everywhere;
    j["never_longer"] = r.verdict.never_longer;
    j["shorter_somewhere"] = r.verdict.shorter_somewhere;
    j["min_coverage"] = r.verdict.min_coverage;
    j["gamma_at_min_coverage"] = r.verdict.gamma_at_min_coverage;
    j["max_scaled_length"] = r.verdict.max_scaled_length;
    j["min_scaled_length"] = r.verdict.min_scaled_length;
    j["integral_r1"] = r.integral_r1;
    j["integral_r2"] = r.integral_r2;
    j["g_at_lambda_star"] = r.g_at_lambda_star;
    os << j.dump() << "\n";
  }
}

void write_bs_sample_csv(std::ostream& os, const BSFunctions& bs,
                         int points_per_segment,
                         const std::string& provenance) {
  if (points_per_segment < 2)
    throw InputError("write_bs_sample_csv: points_per_segment must be >= 2");
  if (!provenance.empty()) os << provenance << "\n";
  os << "x,b,s\n";
  auto emit = [&](double x) {
    os << fmt(x) << ',' << fmt(bs.b(x)) << ',' << fmt(bs.s(x)) << "\n";
  };
  for (const BSSegment& seg : bs.segments())
    for (int i = 0; i < points_per_segment; ++i) {
      // stay strictly inside the piece so jumps are sampled one-sided
      const double u = (i + 0.5) / points_per_segment;
      emit(seg.x_lo + (seg.x_hi - seg.x_lo) * u);
    }
  emit(bs.x_end() + 0.25 * std::max(1.0, bs.d()));
}

}  // namespace cirisk

#include "nrel/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nrel {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_header() {
  return "alpha,rho,seed,mse_input,psnr_input,target_alignment,"
         "source_alignment,pivot_error_max,runtime_ms";
}

std::string to_csv_line(const MetricsRow& r) {
  std::string line;
  line += format_double(r.alpha);
  line += ',';
  line += format_double(r.rho);
  line += ',';
  line += std::to_string(r.seed);
  line += ',';
  line += format_double(r.mse_input);
  line += ',';
  line += format_double(r.psnr_input);
  line += ',';
  line += format_double(r.target_alignment);
  line += ',';
  line += format_double(r.source_alignment);
  line += ',';
  line += format_double(r.pivot_error_max);
  line += ',';
  line += format_double(r.runtime_ms);
  return line;
}

void emit_csv(const std::vector<MetricsRow>& rows,
              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("emit_csv: cannot open " + path.string());
  }
  out << csv_header() << '\n';
  for (const auto& r : rows) out << to_csv_line(r) << '\n';
  if (!out) throw std::runtime_error("emit_csv: write failed " + path.string());
}

namespace {

double parse_field(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("parse_csv: bad numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("parse_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw std::invalid_argument("parse_csv: missing or wrong header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 9) {
      throw std::invalid_argument("parse_csv: expected 9 fields");
    }
    MetricsRow r;
    r.alpha = parse_field(fields[0]);
    r.rho = parse_field(fields[1]);
    r.seed = static_cast<std::uint64_t>(std::stoull(fields[2]));
    r.mse_input = parse_field(fields[3]);
    r.psnr_input = parse_field(fields[4]);
    r.target_alignment = parse_field(fields[5]);
    r.source_alignment = parse_field(fields[6]);
    r.pivot_error_max = parse_field(fields[7]);
    r.runtime_ms = parse_field(fields[8]);
    rows.push_back(r);
  }
  return rows;
}

void write_manifest(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("write_manifest: cannot open " +
                                path.string());
  }
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

}  // namespace nrel

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nrel {

// One line of sweep/edit metrics. Column semantics:
//   mse_input/psnr_input: identity preservation of the edit vs the input
//   target_alignment/source_alignment: backend alignment score of the edit
//     under the target/source prompt (surrogate named in the manifest)
//   pivot_error_max: largest per-step squared pivot distance of the
//     inversion used (0 for plain inversion)
//   runtime_ms: deterministic work proxy — backend evaluations / 1000
struct MetricsRow {
  double alpha = 0.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  double mse_input = 0.0;
  double psnr_input = 0.0;
  double target_alignment = 0.0;
  double source_alignment = 0.0;
  double pivot_error_max = 0.0;
  double runtime_ms = 0.0;
};

// Shortest round-trip decimal formatting (locale-free); infinities render
// as "inf"/"-inf".
std::string format_double(double v);

// The fixed CSV header.
std::string csv_header();

std::string to_csv_line(const MetricsRow& row);

// Header + one line per row, '\n' newlines, no trailing commas.
void emit_csv(const std::vector<MetricsRow>& rows,
              const std::filesystem::path& path);

std::vector<MetricsRow> parse_csv(const std::filesystem::path& path);

// Plain-text `key = value` manifest accompanying result files.
void write_manifest(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace nrel

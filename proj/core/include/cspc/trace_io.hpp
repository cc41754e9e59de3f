#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cspc/engine.hpp"

namespace cspc {

enum class TraceFormat { Csv, Json };
enum class TableLayout {
  Wide,  // one row per cycle, per-provider columns
  Long,  // one row per (cycle, provider)
};

TraceFormat trace_format_from_string(std::string_view name);

/// Wide columns: pcc, price_j.., cap_j.., load_j.., prb_j.., condition_j..,
/// honest_j.., sum_abs_error, mean_price, bai_count (j is 1-based).
/// Numbers are written in shortest round-trip form.
void write_trace_csv(const SimTrace& trace, std::ostream& out, TableLayout layout = TableLayout::Wide);

/// Parses a wide table written by write_trace_csv. Throws DomainError on
/// malformed input.
std::vector<PccRecord> read_trace_csv(std::istream& in);

nlohmann::json records_to_json(const SimTrace& trace);
std::vector<PccRecord> records_from_json(const nlohmann::json& doc);

/// Config snapshot, seed, and final metrics of a run.
nlohmann::json run_summary(const SimTrace& trace);

/// Writes the per-cycle table (trace.csv / trace.json, plus
/// trace_long.csv when `long_layout`) and summary.json into `dir`,
/// creating it if needed. Returns the files written; IoError on failure.
std::vector<std::filesystem::path> export_trace(const SimTrace& trace, TraceFormat format,
                                                const std::filesystem::path& dir, bool long_layout = false);

}  // namespace cspc

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cva {

struct ReportRow {
    std::string label;
    double risk_free = 0.0;
    std::optional<double> risky_ctm;
    std::optional<double> risky_dtm;
    std::optional<double> cva_ctm;
    std::optional<double> cva_dtm;
    std::optional<double> relative_difference;
    std::optional<double> standard_error;
};

/// 1 - cva_dtm / cva_ctm; empty when the CTM charge is zero.
std::optional<double> relative_difference(double cva_ctm, double cva_dtm);

/// Fixed six-decimal rendering; negative zero prints as 0.000000.
std::string format_value(double v);

/// Header plus one line per row. Labels containing separators are quoted.
std::string render_report(const std::vector<ReportRow>& rows);

/// Writes `content` to `path` through a temporary file and a rename, so a
/// failed run never leaves a partial file.
void write_atomically(const std::string& path, const std::string& content);

void emit_report(const std::vector<ReportRow>& rows, const std::string& path);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string content_hash(const std::string& bytes);

/// key=value lines in the given order.
std::string render_meta(const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace cva

#include "cva/report.hpp"

#include "cva/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace cva {

std::optional<double> relative_difference(double cva_ctm, double cva_dtm) {
    if (cva_ctm == 0.0)
        return std::nullopt;
    return 1.0 - cva_dtm / cva_ctm;
}

std::string format_value(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000")
        s = "0.000000";
    return s;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string optional_field(const std::optional<double>& v) { return v ? format_value(*v) : std::string(); }

} // namespace

std::string render_report(const std::vector<ReportRow>& rows) {
    std::string out = "label,risk_free,risky_ctm,risky_dtm,cva_ctm,cva_dtm,relative_difference,standard_error\n";
    for (const ReportRow& r : rows) {
        out += csv_field(r.label) + ',' + format_value(r.risk_free) + ',' + optional_field(r.risky_ctm) + ',' +
               optional_field(r.risky_dtm) + ',' + optional_field(r.cva_ctm) + ',' + optional_field(r.cva_dtm) + ',' +
               optional_field(r.relative_difference) + ',' + optional_field(r.standard_error) + '\n';
    }
    return out;
}

void write_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("report: cannot open " + temp.string());
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(temp);
            throw std::runtime_error("report: write failed for " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp);
        throw std::runtime_error("report: cannot rename to " + target.string() + ": " + ec.message());
    }
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& path) {
    if (rows.empty())
        throw InputError("report: no rows to write");
    write_atomically(path, render_report(rows));
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string render_meta(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out;
    for (const auto& [k, v] : entries)
        out += k + '=' + v + '\n';
    return out;
}

} // namespace cva

#pragma once

#include "tvrise/analysis.hpp"
#include "tvrise/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tvrise {

/// Column names of a trajectory CSV, in order:
///   t, x1..xn, e1..en, r1..rn, u1..un, theta1..thetap, theta_hat1..theta_hatp,
///   theta_tilde1..theta_tildep, P, V_L, branch, switching
/// with p = n + m, i.e. 1 + 4n + 3p + 4 columns.
[[nodiscard]] std::vector<std::string> csv_header(int n, int m);

/// Writes one row per sample. Numbers use 17 significant digits; fields that
/// need it are quoted per RFC 4180; records end with CRLF.
void write_csv(std::ostream& out, const TrajectoryRecord& record);

/// Header plus rows of raw fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws InputError if absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    /// Column parsed as numbers; throws InputError on a non-numeric field.
    [[nodiscard]] std::vector<double> numeric(const std::string& name) const;
};

/// RFC 4180 reader (CRLF or LF line ends). Throws InputError on an
/// unterminated quote, stray characters after a closing quote, or rows whose
/// width differs from the header.
[[nodiscard]] CsvTable read_csv(std::istream& in);

/// Escapes one field per RFC 4180.
[[nodiscard]] std::string csv_field(const std::string& value);

[[nodiscard]] ordered_json metrics_json(const RunMetrics& metrics);
[[nodiscard]] ordered_json bounds_json(const BoundReport& report, const GainCheck& gain);
[[nodiscard]] ordered_json verification_json(const VerificationReport& report);

/// Run summary: scenario, gains, metrics and (for RISE) the verification report.
[[nodiscard]] ordered_json run_summary(const TrajectoryRecord& record, const Scenario& scenario,
                                       const VerificationReport* report);

/// Writes JSON with two-space indentation and a trailing newline; keys keep insertion order.
void write_json_file(const std::string& path, const ordered_json& doc);

} // namespace tvrise

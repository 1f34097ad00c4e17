#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairflip/attacks.hpp"
#include "fairflip/independence.hpp"
#include "fairflip/oracle.hpp"

namespace fairflip {

// JSON for nested reports, CSV for tables. All emitters are deterministic:
// same inputs, byte-identical text. Every JSON document carries a
// schema_version field.

inline constexpr int kSchemaVersion = 1;

std::string bias_report_json(const BiasReport& rep, int rounds);
std::string validation_json(const std::string& protocol, const ValidationReport& rep);
std::string certification_json(const CertificationReport& rep);
std::string forecast_json(const Forecast& f);

std::string martingale_csv_header();
std::string martingale_csv_row(const std::string& protocol, int rounds, double theta,
                               const Rat& gap_probability, double bound, bool pass);

std::string correlation_csv_header();
std::vector<std::string> correlation_csv_rows(const CorrelationReport& rep);

/// Summary of attack result files: one row per bias report, with the
/// 1/(640 sqrt r), 1/(6400 sqrt r) and 1/(25600 sqrt r) floors and pass
/// flags. Files must be bias_report_json outputs; anything else raises
/// ParseError naming the file.
struct SummaryOptions {
    bool markdown = false;
};
std::string summarize_reports(std::span<const std::string> paths, const SummaryOptions& opt = {});

} // namespace fairflip

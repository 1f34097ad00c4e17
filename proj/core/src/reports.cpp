#include "fairflip/reports.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fairflip {

using ordered_json = nlohmann::ordered_json;

namespace {

// shortest round-trip representation, byte-stable across runs
std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// RFC-4180 quoting for fields that embed commas or quotes
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string bias_report_json(const BiasReport& rep, int rounds) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["protocol"] = rep.protocol;
    j["rounds"] = rounds;
    j["corrupted"] = party_name(rep.corrupted);
    j["target"] = rep.target;
    j["bias"] = rep.bias().to_double();
    j["bias_exact"] = rep.bias().to_string();
    j["pr_one"] = rep.pr_one.to_double();
    j["pr_one_exact"] = rep.pr_one.to_string();
    ordered_json hist = ordered_json::object();
    for (const auto& [round, pr] : rep.abort_round) {
        std::string key = round == rounds + 1 ? "none" : std::to_string(round);
        hist[key] = pr.to_double();
    }
    j["abort_hist"] = hist;
    j["mode"] = rep.exact ? "exact" : "sampled";
    j["n"] = rep.samples;
    j["seed"] = rep.seed;
    return j.dump(2) + "\n";
}

std::string validation_json(const std::string& protocol, const ValidationReport& rep) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["protocol"] = protocol;
    j["all_pass"] = rep.all_pass();
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["detail"] = c.detail;
        if (c.witness) e["witness"] = {(*c.witness)[0], (*c.witness)[1]};
        checks.push_back(e);
    }
    j["checks"] = checks;
    return j.dump(2) + "\n";
}

std::string certification_json(const CertificationReport& rep) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["protocol"] = rep.protocol;
    j["k"] = rep.bits;
    j["rho"] = rep.rho;
    j["corrupted"] = party_name(rep.corrupted);
    j["pr_abort"] = rep.pr_abort.to_double();
    j["pr_abort_exact"] = rep.pr_abort.to_string();
    j["expected_g_at_stop"] = rep.expected_g_at_stop.to_double();
    j["expected_g_at_stop_exact"] = rep.expected_g_at_stop.to_string();
    j["honest_mean"] = rep.honest_mean.to_double();
    j["backup_forecast_drift"] = rep.backup_forecast_drift.to_double();
    j["measured_bias"] = rep.measured_bias.to_double();
    j["measured_bias_exact"] = rep.measured_bias.to_string();
    j["assembled_lower_bound"] = rep.assembled_lower_bound;
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json e;
        e["name"] = c.name;
        e["lhs"] = c.lhs;
        e["rhs"] = c.rhs;
        e["slack"] = c.rhs - c.lhs;
        e["pass"] = c.pass;
        e["note"] = c.note;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["all_pass"] = rep.all_pass();
    return j.dump(2) + "\n";
}

std::string forecast_json(const Forecast& f) {
    ordered_json j;
    j["k"] = f.bits;
    j["pa_fp"] = f.pa_fp;
    j["pb_fp"] = f.pb_fp;
    return j.dump();
}

std::string martingale_csv_header() {
    return "protocol,rounds,theta,gap_probability,bound,pass";
}

std::string martingale_csv_row(const std::string& protocol, int rounds, double theta,
                               const Rat& gap_probability, double bound, bool pass) {
    std::ostringstream os;
    os << csv_field(protocol) << ',' << rounds << ',' << fmt(theta) << ',' << fmt(gap_probability.to_double())
       << ',' << fmt(bound) << ',' << (pass ? "1" : "0");
    return os.str();
}

std::string correlation_csv_header() {
    return "protocol,k,round,party,corr,bound,pass";
}

std::vector<std::string> correlation_csv_rows(const CorrelationReport& rep) {
    std::vector<std::string> rows;
    rows.reserve(rep.rounds.size());
    for (const auto& row : rep.rounds) {
        std::ostringstream os;
        os << csv_field(rep.protocol) << ',' << rep.bits << ',' << row.i << ',' << party_name(rep.attacker)
           << ',' << fmt(row.corr.to_double()) << ',' << fmt(row.bound.to_double()) << ','
           << (row.pass ? "1" : "0");
        rows.push_back(os.str());
    }
    return rows;
}

// ============================================================================
// Summary table
// ============================================================================

namespace {

struct SummaryRow {
    std::string protocol, corrupted;
    int target = 0, rounds = 0;
    double bias = 0;
};

SummaryRow parse_bias_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("report: cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("report: malformed JSON in " + path + ": " + e.what());
    }
    try {
        SummaryRow row;
        row.protocol = j.at("protocol").get<std::string>();
        row.corrupted = j.at("corrupted").get<std::string>();
        row.target = j.at("target").get<int>();
        row.rounds = j.at("rounds").get<int>();
        row.bias = j.at("bias").get<double>();
        return row;
    } catch (const std::exception& e) {
        throw ParseError("report: missing field in " + path + ": " + e.what());
    }
}

} // namespace

std::string summarize_reports(std::span<const std::string> paths, const SummaryOptions& opt) {
    std::vector<SummaryRow> rows;
    rows.reserve(paths.size());
    for (const auto& p : paths) rows.push_back(parse_bias_file(p));

    std::ostringstream os;
    const char* names[3] = {"640", "6400", "25600"};
    const double coeffs[3] = {640, 6400, 25600};
    if (opt.markdown) {
        os << "| protocol | corrupted | target | bias | 1/(640 sqrt r) | 1/(6400 sqrt r) | 1/(25600 sqrt r) |\n";
        os << "|---|---|---|---|---|---|---|\n";
        for (const auto& r : rows) {
            os << "| " << r.protocol << " | " << r.corrupted << " | " << r.target << " | "
               << fmt(r.bias);
            for (double c : coeffs) {
                double bound = 1.0 / (c * std::sqrt(double(r.rounds)));
                os << " | " << fmt(bound) << (r.bias >= bound ? " pass" : " FAIL");
            }
            os << " |\n";
        }
    } else {
        os << "protocol,corrupted,target,rounds,bias";
        for (const char* n : names) os << ",bound_" << n << ",pass_" << n;
        os << "\n";
        for (const auto& r : rows) {
            os << csv_field(r.protocol) << ',' << r.corrupted << ',' << r.target << ',' << r.rounds << ','
               << fmt(r.bias);
            for (double c : coeffs) {
                double bound = 1.0 / (c * std::sqrt(double(r.rounds)));
                os << ',' << fmt(bound) << ',' << (r.bias >= bound ? "1" : "0");
            }
            os << "\n";
        }
    }
    return os.str();
}

} // namespace fairflip

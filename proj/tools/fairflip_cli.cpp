// Command-line harness: runs the validation, martingale, attack, estimator,
// independence and certification pipelines over the protocol zoo and writes
// machine-readable reports. Exit code 0 means every asserted bound passed.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairflip/attacks.hpp"
#include "fairflip/estimator.hpp"
#include "fairflip/forecaster.hpp"
#include "fairflip/independence.hpp"
#include "fairflip/oracle.hpp"
#include "fairflip/reports.hpp"
#include "fairflip/zoo.hpp"

namespace ff = fairflip;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ff::Error("cannot write " + out_path);
        out << text;
    }
}

ff::PartyId parse_party(const std::string& s) {
    if (s == "A" || s == "a") return ff::PartyId::A;
    if (s == "B" || s == "b") return ff::PartyId::B;
    throw ff::DomainError("party must be A or B");
}

std::shared_ptr<const ff::TranscriptTree> build_tree(const std::string& protocol) {
    return std::make_shared<ff::TranscriptTree>(ff::zoo::make_from_string(protocol));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact analysis and simulation of fail-stop attacks on two-party coin flipping"};
    app.require_subcommand(0, 1);
    bool list_protocols = false;
    app.add_flag("--protocols", list_protocols, "list the protocol zoo and exit");

    std::string protocol = "blum";
    std::string out_path;
    int bits = 8;
    uint64_t seed = 0;
    double rho = 0.0;

    // --- validate ---------------------------------------------------------
    auto* cmd_validate = app.add_subcommand("validate", "check the coin-flipping contract");
    std::vector<std::string> waive;
    cmd_validate->add_option("--protocol", protocol, "zoo protocol, e.g. majority:5")->required();
    cmd_validate->add_option("--waive", waive, "checks to waive (e.g. uniformity)");
    cmd_validate->add_option("--out", out_path, "write the JSON report here");
    cmd_validate->add_flag("--stopped", "validate the stopped variant of the protocol");

    // --- martingale -------------------------------------------------------
    auto* cmd_mart = app.add_subcommand("martingale", "jump probability of the outcome martingale");
    std::string theta = "auto";
    std::string conditioning = "transcript";
    cmd_mart->add_option("--protocol", protocol)->required();
    cmd_mart->add_option("--theta", theta, "'auto' for 1/(4 sqrt r), or a number");
    cmd_mart->add_option("--conditioning", conditioning, "transcript | forecast");
    cmd_mart->add_option("--bits", bits, "forecaster bits (forecast mode)");
    cmd_mart->add_option("--out", out_path);

    // --- attack -----------------------------------------------------------
    auto* cmd_attack = app.add_subcommand("attack", "run a fail-stop attacker and measure bias");
    std::string attacker = "ci";
    std::string corrupted = "A";
    std::string mode = "exact";
    std::string oracle_mode = "exact";
    int target = 0;
    uint64_t samples = 100000;
    cmd_attack->add_option("--protocol", protocol)->required();
    cmd_attack->add_option("--attacker", attacker, "ci | gap | astar");
    cmd_attack->add_option("--corrupted", corrupted, "A | B");
    cmd_attack->add_option("--target", target, "bit the attacker pushes toward");
    cmd_attack->add_option("--mode", mode, "exact | sampled");
    cmd_attack->add_option("--n", samples, "sample count (sampled mode)");
    cmd_attack->add_option("--seed", seed);
    cmd_attack->add_option("--oracle", oracle_mode, "exact | estimator (gap/astar)");
    cmd_attack->add_option("--rho", rho, "estimator accuracy parameter");
    cmd_attack->add_option("--bits", bits, "forecaster bits (gap/astar)");
    cmd_attack->add_option("--out", out_path);

    // --- estimator --------------------------------------------------------
    auto* cmd_est = app.add_subcommand("estimator", "accuracy experiment for the sampling estimator");
    int trials = 200;
    double est_rho = 0.5;
    cmd_est->add_option("--protocol", protocol)->required();
    cmd_est->add_option("--rho", est_rho)->required();
    cmd_est->add_option("--trials", trials);
    cmd_est->add_option("--seed", seed)->required();
    cmd_est->add_option("--bits", bits);
    cmd_est->add_option("--out", out_path);

    // --- independence -----------------------------------------------------
    auto* cmd_ind = app.add_subcommand("independence", "attack-decision independence quantities");
    cmd_ind->add_option("--protocol", protocol)->required();
    cmd_ind->add_option("--bits", bits);
    cmd_ind->add_option("--out", out_path);

    // --- certify ----------------------------------------------------------
    auto* cmd_cert = app.add_subcommand("certify", "audit the round-skipping attack bound chain");
    cmd_cert->add_option("--protocol", protocol)->required();
    cmd_cert->add_option("--bits", bits);
    cmd_cert->add_option("--rho", rho);
    cmd_cert->add_option("--corrupted", corrupted);
    cmd_cert->add_option("--out", out_path);

    // --- report -----------------------------------------------------------
    auto* cmd_report = app.add_subcommand("report", "summarize attack result files");
    std::vector<std::string> files;
    bool markdown = false;
    cmd_report->add_option("files", files, "bias report JSON files");
    cmd_report->add_flag("--markdown", markdown);
    cmd_report->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    if (list_protocols) {
        for (const auto& e : ff::zoo::list()) {
            std::cout << e.name;
            if (!e.params_doc.empty()) std::cout << "  params: " << e.params_doc;
            std::cout << "\n    " << e.properties_doc << "\n";
        }
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*cmd_validate) {
            ff::ProtocolSpec spec = ff::zoo::make_from_string(protocol);
            if (cmd_validate->count("--stopped")) spec = ff::make_stopped(spec);
            auto rep = ff::validate(spec);
            emit(ff::validation_json(spec.name, rep), out_path);
            return rep.all_pass_except(waive) ? 0 : 1;
        }

        if (*cmd_mart) {
            auto tree = build_tree(protocol);
            const int r = tree->spec().rounds;
            ff::GapThreshold th = theta == "auto" ? ff::GapThreshold::inv_sqrt(4)
                                                  : ff::GapThreshold::fixed(std::stod(theta));
            ff::Rat pr;
            if (conditioning == "transcript") {
                pr = ff::gap_probability(*tree, th);
            } else if (conditioning == "forecast") {
                ff::ForecastOracle oracle(tree, bits);
                pr = ff::gap_probability(oracle, th);
            } else {
                throw ff::DomainError("conditioning must be transcript or forecast");
            }
            const double bound = theta == "auto" ? 1.0 / 20 : 0.0;
            const bool pass = pr.to_double() >= bound - 1e-12;
            emit(ff::martingale_csv_header() + "\n" +
                     ff::martingale_csv_row(tree->spec().name, r, th.to_double(r), pr, bound, pass) + "\n",
                 out_path);
            return pass ? 0 : 1;
        }

        if (*cmd_attack) {
            auto tree = build_tree(protocol);
            ff::AttackConfig cfg;
            cfg.corrupted = parse_party(corrupted);
            cfg.target = target;
            cfg.rho = rho;
            cfg.seed = seed;
            if (attacker == "ci") cfg.kind = ff::AttackerKind::CI;
            else if (attacker == "gap") cfg.kind = ff::AttackerKind::Gap;
            else if (attacker == "astar") cfg.kind = ff::AttackerKind::AStar;
            else throw ff::DomainError("attacker must be ci, gap or astar");
            if (oracle_mode == "estimator") cfg.mode = ff::AttackOracleMode::Estimator;
            else if (oracle_mode != "exact") throw ff::DomainError("oracle must be exact or estimator");

            const bool sampled = mode == "sampled";
            if (!sampled && mode != "exact") throw ff::DomainError("mode must be exact or sampled");
            if ((sampled || cfg.mode == ff::AttackOracleMode::Estimator) && !cmd_attack->count("--seed"))
                throw ff::DomainError("sampled modes need an explicit --seed");

            auto oracle = std::make_shared<ff::ForecastOracle>(tree, bits);
            ff::FailStopStrategy strat = ff::make_attack(oracle, cfg);
            ff::MeasureMode mm = sampled ? ff::MeasureMode::sampled(samples, seed)
                                         : ff::MeasureMode::exact_mode();
            ff::BiasReport rep = ff::measure_bias(*tree, strat, mm);
            emit(ff::bias_report_json(rep, tree->spec().rounds), out_path);
            return 0;
        }

        if (*cmd_est) {
            auto tree = build_tree(protocol);
            ff::ForecastOracle oracle(tree, bits);
            auto res = ff::estimator_experiment(oracle, est_rho, trials, seed);
            emit(ff::EstimatorExperiment::csv_header() + "\n" + res.csv_row() + "\n", out_path);
            return res.failure_rate <= est_rho ? 0 : 1;
        }

        if (*cmd_ind) {
            auto tree = build_tree(protocol);
            auto oracle = std::make_shared<ff::ForecastOracle>(tree, bits);
            std::string text = ff::correlation_csv_header() + "\n";
            bool pass = true;
            for (ff::PartyId p : {ff::PartyId::A, ff::PartyId::B}) {
                auto rep = ff::attack_correlation(*oracle, ff::a_star_abort_test(oracle, p), p);
                for (const auto& row : ff::correlation_csv_rows(rep)) text += row + "\n";
                pass = pass && rep.all_pass();
            }
            emit(text, out_path);
            return pass ? 0 : 1;
        }

        if (*cmd_cert) {
            auto tree = build_tree(protocol);
            auto oracle = std::make_shared<ff::ForecastOracle>(tree, bits);
            auto rep = ff::a_star_certify(oracle, rho, parse_party(corrupted));
            emit(ff::certification_json(rep), out_path);
            return rep.all_pass() ? 0 : 1;
        }

        if (*cmd_report) {
            emit(ff::summarize_reports(files, {markdown}), out_path);
            return 0;
        }
    } catch (const ff::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const ff::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 4;
    } catch (const ff::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#include "fairflip/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace fairflip {

// ============================================================================
// Sample complexity
// ============================================================================

uint64_t sample_count(int c, int r, double rho) {
    if (c < 1) throw DomainError("sample_count: c must be >= 1");
    if (r < 1) throw DomainError("sample_count: r must be >= 1");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("sample_count: rho must lie in (0,1)");

    using F = boost::multiprecision::cpp_bin_float_50;
    const int eff_c = std::max(c, 2);
    F base = 2 * pow(F(eff_c), r) / F(rho);
    F t = F("0.5") * pow(base, 4) * log(F(8) / F(rho));
    F v = ceil(t);
    if (v > F(uint64_t(1) << 62))
        throw CapacityError("sample_count: v exceeds 2^62 samples; pick a larger rho");
    return v.convert_to<uint64_t>();
}

double EstimatorParams::asymptotic_rho(int r) {
    return 1e-6 * std::pow(double(r), -2.5);
}

// ============================================================================
// Binomial sampling
// ============================================================================

namespace {

double uniform01(Rng& rng) {
    return double(rng.next_u64() >> 11) * 0x1.0p-53;
}

// inversion; fine while n * p stays small
uint64_t binomial_binv(Rng& rng, uint64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double a = double(n + 1) * s;
    double r = std::exp(double(n) * std::log1p(-p)); // q^n
    double u = uniform01(rng);
    uint64_t k = 0;
    while (u > r) {
        u -= r;
        ++k;
        if (k > n) return n; // numerical guard
        r *= a / double(k) - s;
    }
    return k;
}

// transformed rejection with squeeze (Hoermann's BTRS); needs p <= 0.5 and
// n p >= 10
uint64_t binomial_btrs(Rng& rng, uint64_t n, double p) {
    const double q = 1.0 - p;
    const double spq = std::sqrt(double(n) * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = double(n) * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double urvr = 0.86 * vr;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor(double(n + 1) * p);
    const double h = std::lgamma(m + 1) + std::lgamma(double(n) - m + 1);

    for (;;) {
        double v = uniform01(rng);
        double u;
        if (v <= urvr) {
            u = v / vr - 0.43;
            return uint64_t(std::floor((2 * a / (0.5 - std::fabs(u)) + b) * u + c));
        }
        if (v >= vr) {
            u = uniform01(rng) - 0.5;
        } else {
            u = v / vr - 0.93;
            u = (u < 0 ? -0.5 : 0.5) - u;
            v = uniform01(rng) * vr;
        }
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2 * a / us + b) * u + c);
        if (kd < 0 || kd > double(n)) continue;
        v = v * alpha / (a / (us * us) + b);
        if (std::log(v) <= h - std::lgamma(kd + 1) - std::lgamma(double(n) - kd + 1) +
                               (kd - m) * lpq)
            return uint64_t(kd);
    }
}

} // namespace

uint64_t binomial_draw(Rng& rng, uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const bool flipped = p > 0.5;
    const double pp = flipped ? 1.0 - p : p;
    uint64_t k = (double(n) * pp < 10.0) ? binomial_binv(rng, n, pp)
                                         : binomial_btrs(rng, n, pp);
    return flipped ? n - k : k;
}

// ============================================================================
// estimate_g
// ============================================================================

namespace {

constexpr uint64_t kLiteralLimit = uint64_t(1) << 20;
constexpr uint64_t kLiteralHardLimit = uint64_t(1) << 26;

Rat estimate_literal(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
                     uint64_t seed, uint64_t v) {
    const TranscriptTree& tree = oracle.tree();
    const ProtocolSpec& spec = tree.spec();
    const int depth = int(f_prefix.size());
    Rng rng(seed);
    uint64_t q = 0, p = 0;
    for (uint64_t j = 0; j < v; ++j) {
        uint64_t a = rng.below(spec.rand_domain[0]);
        uint64_t b = rng.below(spec.rand_domain[1]);
        // walk the tree along the sampled execution, matching forecasts
        std::size_t cur = 0;
        std::vector<int> msgs;
        bool match = true;
        const std::array<uint64_t, 2> tapes{a, b};
        for (int i = 1; i <= depth && match; ++i) {
            int sym = spec.message_fn(i, tapes[idx(spec.sender(i))], msgs);
            msgs.push_back(sym);
            std::size_t next = SIZE_MAX;
            for (std::size_t ch : tree.node(cur).children)
                if (tree.node(ch).messages.back() == sym) { next = ch; break; }
            if (next == SIZE_MAX)
                throw Error("estimate_g: sampled execution left the transcript tree");
            cur = next;
            if (!(oracle.forecast_of_node(cur) == f_prefix[std::size_t(i - 1)])) match = false;
        }
        if (!match) continue;
        ++q;
        // finish the execution to learn the output
        for (int i = depth + 1; i <= spec.rounds; ++i)
            msgs.push_back(spec.message_fn(i, tapes[idx(spec.sender(i))], msgs));
        p += uint64_t(spec.output_fn(PartyId::A, a, msgs));
    }
    if (q == 0) return Rat(0);
    return Rat(Rat::Int(p), Rat::Int(q));
}

Rat estimate_sufficient(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
                        uint64_t seed, uint64_t v) {
    const int level = int(f_prefix.size());
    std::vector<Forecast> key(f_prefix.begin(), f_prefix.end());
    const auto& cells = oracle.cells(level);
    auto it = cells.find(key);
    Rng rng(seed);
    if (it == cells.end()) return Rat(0); // q = p = 0 with certainty
    uint64_t q = binomial_draw(rng, v, it->second.prob.to_double());
    if (q == 0) return Rat(0);
    uint64_t p = binomial_draw(rng, q, it->second.g.to_double());
    return Rat(Rat::Int(p), Rat::Int(q));
}

} // namespace

Rat estimate_g(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
               uint64_t seed, const EstimatorParams& params, EstimatePath path) {
    if (f_prefix.empty() || int(f_prefix.size()) > oracle.spec().rounds)
        throw DomainError("estimate_g: forecast prefix length must be in [1, r]");
    if (path == EstimatePath::Auto)
        path = params.v <= kLiteralLimit ? EstimatePath::Literal
                                         : EstimatePath::SufficientStatistic;
    if (path == EstimatePath::Literal && params.v > kLiteralHardLimit)
        throw CapacityError("estimate_g: literal sampling with v = " + std::to_string(params.v) +
                            " is infeasible; use the sufficient-statistic path");
    return path == EstimatePath::Literal
               ? estimate_literal(oracle, f_prefix, seed, params.v)
               : estimate_sufficient(oracle, f_prefix, seed, params.v);
}

Rat estimate_g(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
               uint64_t seed, double rho, EstimatePath path) {
    auto params = EstimatorParams::derive(oracle.measured_c(), oracle.spec().rounds, rho);
    return estimate_g(oracle, f_prefix, seed, params, path);
}

// ============================================================================
// Experiment
// ============================================================================

EstimatorExperiment estimator_experiment(const ForecastOracle& oracle, double rho,
                                         int trials, uint64_t seed) {
    if (trials < 1) throw DomainError("estimator_experiment: trials must be >= 1");
    const ProtocolSpec& spec = oracle.spec();
    EstimatorExperiment out;
    out.protocol = spec.name;
    out.bits = oracle.bits();
    out.measured_c = oracle.measured_c();
    out.rho = rho;
    out.trials = trials;
    out.seed = seed;
    auto params = EstimatorParams::derive(oracle.measured_c(), spec.rounds, rho);
    out.v = params.v;

    Rng root = Rng(seed).derive("estimator-experiment");
    for (int t = 0; t < trials; ++t) {
        Rng trial = root.derive(uint64_t(t));
        const int i = 1 + int(trial.below(uint64_t(spec.rounds)));
        uint64_t a = trial.below(spec.rand_domain[0]);
        uint64_t b = trial.below(spec.rand_domain[1]);
        ExecutionRecord rec = execute(spec, a, b);
        std::span<const int> prefix(rec.messages.data(), std::size_t(i));
        auto seq = oracle.forecast_sequence(prefix);
        std::vector<Forecast> f_prefix(seq.begin() + 1, seq.end()); // f_1..f_i
        Rat truth = *oracle.g(f_prefix);
        Rat est = estimate_g(oracle, f_prefix, trial.next_u64(), params);
        if ((est - truth).abs().to_double() > rho) ++out.failures;
    }
    out.failure_rate = double(out.failures) / double(trials);
    return out;
}

std::string EstimatorExperiment::csv_header() {
    return "protocol,k,rho,v,trials,failures,failure_rate,seed";
}

std::string EstimatorExperiment::csv_row() const {
    std::ostringstream os;
    bool quote = protocol.find(',') != std::string::npos;
    os << (quote ? "\"" + protocol + "\"" : protocol) << ',' << bits << ',' << rho << ',' << v
       << ',' << trials << ',' << failures << ',' << failure_rate << ',' << seed;
    return os.str();
}

} // namespace fairflip

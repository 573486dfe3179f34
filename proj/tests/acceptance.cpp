// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pnd/pnd.hpp"

using namespace pnd;

namespace {

constexpr double kReferenceFloor = 0.1418;
constexpr double kFloorWindow = 0.005;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += "[FAIL] ";
        }
        detail += what + "; ";
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Scenario scenario(ChannelKind ch, Oscillators os, double rho_db, int m, PhaseNoiseModel model) {
    Scenario s;
    s.channel = ch;
    s.oscillators = os;
    s.rho = db_to_linear(rho_db);
    s.antennas = m;
    s.noise = {std::move(model)};
    return s;
}

RunControl fixed_trials(std::uint64_t trials) { return {trials, 0, 1000, default_threads()}; }

const char* kind_name(ChannelKind ch, Oscillators os) {
    if (ch == ChannelKind::Constant) return os == Oscillators::Synchronous ? "CC-S" : "CC-NS";
    return os == Oscillators::Synchronous ? "FC-S" : "FC-NS";
}

// Criteria 1 and 2 share the 40 dB runs.
std::vector<std::vector<SerEstimate>> high_snr_runs(Oscillators os) {
    std::vector<std::vector<SerEstimate>> out;
    std::uint64_t point = 0;
    for (auto ch : {ChannelKind::Constant, ChannelKind::Fading}) {
        std::vector<SerEstimate> row;
        for (int m : {2, 4, 6}) {
            const auto scn = scenario(ch, os, 40.0, m, fourier_von_mises(4.0));
            row.push_back(estimate_ser(scn, DetectorKind::MaximumLikelihood, {}, fixed_trials(100000),
                                       point_seed(os == Oscillators::Synchronous ? 1001 : 1002, point++)));
        }
        out.push_back(row);
    }
    return out;
}

std::vector<std::vector<SerEstimate>> g_sync;

Outcome criterion1() {
    Outcome o;
    const double floor = ser_floor_sync(fourier_von_mises(4.0), 4).floor;
    o.require(std::abs(floor - kReferenceFloor) < 5e-5, fmt("analytic floor %.6f", floor));
    g_sync = high_snr_runs(Oscillators::Synchronous);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& e = g_sync[c][k];
            o.require(std::abs(e.ser - kReferenceFloor) <= kFloorWindow,
                      std::string(c == 0 ? "CC-S" : "FC-S") + fmt(" M=%g SER=%.5f", 2.0 * (k + 1), e.ser));
        }
    }
    return o;
}

Outcome criterion2() {
    Outcome o;
    for (std::size_t c = 0; c < 2; ++c) {
        double lo = 1.0, hi = 0.0;
        for (const auto& e : g_sync[c]) {
            lo = std::min(lo, e.ser);
            hi = std::max(hi, e.ser);
        }
        o.require(hi - lo < 0.01, std::string(c == 0 ? "CC-S" : "FC-S") + fmt(" spread %.5f", hi - lo));
    }
    const auto ns = high_snr_runs(Oscillators::NonSynchronous);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& r = ns[c];
        const std::string name = c == 0 ? "CC-NS" : "FC-NS";
        for (std::size_t k = 0; k + 1 < r.size(); ++k) {
            const double sep = 3.0 * std::hypot(r[k].std_error, r[k + 1].std_error);
            o.require(r[k].ser - r[k + 1].ser > sep, name + fmt(" SER(M=%g)=%.5f > SER(next)=%.5f", 2.0 * (k + 1), r[k].ser, r[k + 1].ser));
        }
        const double sep = 3.0 * std::hypot(0.5 * r[0].std_error, r[2].std_error);
        o.require(0.5 * r[0].ser - r[2].ser > sep, name + fmt(" SER(6)=%.5f < 0.5 SER(2)=%.5f", r[2].ser, 0.5 * r[0].ser));
    }
    return o;
}

Outcome criterion3() {
    Outcome o;
    ValidationConfig vc;
    const auto report = run_oracle_validation(vc, 3, default_threads());
    for (const auto& c : report.cases) {
        o.require(c.passed == c.instances && c.worst_error <= 1e-6,
                  c.scenario + fmt(" %g/%g worst %.2e", c.passed, c.instances, c.worst_error));
        if (c.passed != c.instances) std::printf("%s\n", c.worst_instance.c_str());
    }
    o.require(report.passed(), "all instances");
    return o;
}

Outcome criterion4() {
    Outcome o;
    constexpr int kInstances = 10000;
    int agree = 0;
    std::mt19937_64 pick(4);
    std::uniform_int_distribution<int> antennas(1, 8);
    std::uniform_real_distribution<double> rho_db(-5.0, 30.0);
    std::uniform_real_distribution<double> log_kappa(std::log(0.5), std::log(32.0));
    for (int i = 0; i < kInstances; ++i) {
        const auto os = i % 2 == 0 ? Oscillators::Synchronous : Oscillators::NonSynchronous;
        const int m = antennas(pick);
        const double db = rho_db(pick);
        const double kappa = std::exp(log_kappa(pick));
        const auto scn = scenario(ChannelKind::Fading, os, db, m, fourier_von_mises(kappa));
        auto rng = substream(4, static_cast<std::uint64_t>(i), StreamRole::Channel);
        const auto obs = simulate_two_slot(scn, i % 4, rng);
        agree += detect_two_slot(scn, obs.received).argmax_index == detect_fc_von_mises(scn, obs.received).argmax_index;
    }
    o.require(agree == kInstances, fmt("%g/%g argmax agreement", agree, kInstances));
    return o;
}

Outcome criterion5() {
    Outcome o;
    // Reference mean term counts, rows S then NS, columns CC/FC at 2, 10, 22 dB.
    const double means[2][2][3] = {{{13.8, 16.2, 15.7}, {12.7, 16.2, 17.1}}, {{10.0, 13.8, 15.8}, {12.5, 16.0, 16.6}}};
    const double grid[3] = {2.0, 10.0, 22.0};
    std::uint64_t point = 0;
    for (int mode = 0; mode < 2; ++mode) {
        const auto os = mode == 0 ? Oscillators::Synchronous : Oscillators::NonSynchronous;
        for (int c = 0; c < 2; ++c) {
            const auto ch = c == 0 ? ChannelKind::Constant : ChannelKind::Fading;
            for (int g = 0; g < 3; ++g) {
                const auto scn = scenario(ch, os, grid[g], 6, fourier_von_mises(4.0));
                const auto e = estimate_ser(scn, DetectorKind::MaximumLikelihood, {}, fixed_trials(100000), point_seed(1005, point++));
                o.require(e.max_terms <= 20 && std::abs(e.mean_terms - means[mode][c][g]) <= 4.0,
                          std::string(kind_name(ch, os)) + fmt(" %gdB mean %.2f max %g", grid[g], e.mean_terms, e.max_terms));
            }
        }
    }
    return o;
}

Outcome criterion6() {
    Outcome o;
    auto noiseless = [](ChannelKind ch, int m) {
        auto s = scenario(ch, Oscillators::NonSynchronous, 40.0, m, fourier_von_mises(4.0));
        s.noiseless = true;
        return s;
    };
    std::uint64_t point = 0;
    for (int m : {8, 16}) {
        const double bound = bernstein_union_bound(4.0, 4, m);
        const auto e = estimate_ser(noiseless(ChannelKind::Constant, m), DetectorKind::HighSnrNs, {}, fixed_trials(1000000),
                                    point_seed(1006, point++));
        o.require(bound >= e.ser, fmt("Bernstein M=%g %.3e >= %.3e", m, bound, e.ser));
    }
    const double cheb = chebyshev_union_bound(4.0, 4, 64);
    const auto e = estimate_ser(noiseless(ChannelKind::Fading, 64), DetectorKind::MinDistanceFcNs, {}, fixed_trials(1000000),
                                point_seed(1006, point++));
    o.require(cheb >= e.ser, fmt("Chebyshev M=64 %.3e >= %.3e", cheb, e.ser));
    bool halves = true;
    for (int n = 1; n < 4; ++n) {
        for (int m : {1, 8, 64, 1000}) {
            halves = halves && chebyshev_pairwise_bound_fc_ns(4.0, 4, n, 2 * m) / chebyshev_pairwise_bound_fc_ns(4.0, 4, n, m) == 0.5;
        }
    }
    o.require(halves, "Chebyshev bound(2M)/bound(M) == 1/2");
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::uint64_t point = 0;
    for (double db : {10.0, 15.0, 20.0, 25.0}) {
        auto ns = scenario(ChannelKind::Fading, Oscillators::NonSynchronous, db, 20, fourier_wrapped_gaussian(0.07));
        ns.slots = 20;
        auto s = ns;
        s.oscillators = Oscillators::Synchronous;
        const auto df = estimate_tslot_ser(ns, TSlotRule::DecisionFeedbackNs, {}, fixed_trials(10000), point_seed(1007, point++));
        const auto genie = estimate_tslot_ser(s, TSlotRule::GenieS, {}, fixed_trials(10000), point_seed(1007, point++));
        const double sep = 3.0 * std::hypot(df.std_error, genie.std_error);
        o.require(genie.ser - df.ser > sep, fmt("%gdB DF %.2e < genie %.2e", db, df.ser, genie.ser) + fmt(" (3 sigma %.1e)", sep));
    }
    return o;
}

Outcome criterion8() {
    Outcome o;
    {
        // Rotation invariance of the four two-slot detectors.
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
        double worst = 0.0;
        for (auto ch : {ChannelKind::Constant, ChannelKind::Fading}) {
            for (auto os : {Oscillators::Synchronous, Oscillators::NonSynchronous}) {
                const auto scn = scenario(ch, os, 8.0, 4, fourier_von_mises(4.0));
                for (int i = 0; i < 50; ++i) {
                    auto rng = substream(8, static_cast<std::uint64_t>(i), StreamRole::Channel);
                    const auto obs = simulate_two_slot(scn, i % 4, rng);
                    auto turned = obs.received;
                    const double common = angle(gen);
                    for (std::size_t m = 0; m < 4; ++m) {
                        const auto r = std::polar(1.0, os == Oscillators::Synchronous ? common : angle(gen));
                        turned.pilot[m] *= r;
                        turned.data[0][m] *= r;
                    }
                    const auto a = detect_two_slot(scn, obs.received);
                    const auto b = detect_two_slot(scn, turned);
                    for (std::size_t s = 0; s < 4; ++s) worst = std::max(worst, std::abs(a.metrics[s] - b.metrics[s]) / std::max(1.0, std::abs(a.metrics[s])));
                }
            }
        }
        o.require(worst <= 1e-12, fmt("rotation invariance %.1e", worst));
    }
    {
        // pdf normalization and coefficient round trip by periodic trapezoid.
        constexpr int grid = 4096;
        double worst = 0.0;
        for (const auto& m : {fourier_von_mises(1.0), fourier_von_mises(4.0), fourier_von_mises(10.0), fourier_wrapped_gaussian(0.07)}) {
            for (int l = 0; l <= m.order(); ++l) {
                double sum = 0.0;
                for (int i = 0; i < grid; ++i) {
                    const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * i / grid;
                    sum += std::cos(l * phi) * pdf_eval(m, phi);
                }
                worst = std::max(worst, std::abs(sum * 2.0 * std::numbers::pi / grid - m.coefficient(static_cast<std::size_t>(l))));
            }
        }
        o.require(worst <= 1e-8, fmt("pdf normalization and round trip %.1e", worst));
    }
    {
        double worst = 0.0;
        for (double var : {0.01, 0.07, 0.5}) {
            for (int t : {2, 5, 20}) {
                const auto conv = convolve_iid(fourier_wrapped_gaussian(var), t);
                const auto direct = fourier_wrapped_gaussian(t * var);
                for (int l = 0; l <= direct.order(); ++l) {
                    worst = std::max(worst, std::abs(conv.coefficient(static_cast<std::size_t>(l)) - direct.coefficient(static_cast<std::size_t>(l))));
                }
            }
        }
        o.require(worst <= 1e-14, fmt("wrapped Gaussian closure %.1e", worst));
    }
    {
        bool mono = true;
        bool ratio_bound = true;
        for (double x : {0.01, 0.5, 1.0, 4.0, 10.0, 49.0, 51.0, 200.0, 1e4}) {
            for (int mu = 1; mu < 40; ++mu) mono = mono && log_bessel_i(mu + 1, x) < log_bessel_i(mu, x);
            for (int nu = 1; nu < 6; ++nu) {
                for (int mu = nu + 1; mu < 12; ++mu) {
                    const double lhs = log_bessel_i(nu, x) - log_bessel_i(mu, x);
                    const double rhs = std::max(0.0, (nu - mu) * std::log(x / 2.0) + std::lgamma(mu + 0.5) - std::lgamma(nu + 0.5));
                    ratio_bound = ratio_bound && lhs > rhs;
                }
            }
        }
        o.require(mono, "Bessel monotone in order");
        o.require(ratio_bound, "Bessel ratio lower bound grid");
    }
    {
        bool exact = true;
        for (int n : {2, 4, 8, 16}) exact = exact && ser_floor_sync(uniform_phase_noise(), n).floor == 1.0 - 1.0 / n;
        o.require(exact, "uniform floor 1 - 1/N");
    }
    {
        auto cfg = parse_config(nlohmann::json::parse(R"({"scenarios": ["CC-S", "CC-NS", "FC-S", "FC-NS"], "rho_db": [5, 20],
            "antennas": [3], "trials": 2000, "target_errors": 25, "block_size": 100, "seed": 8})"));
        auto csv = [&](unsigned threads) {
            std::ostringstream out;
            write_sweep_csv(out, run_ser_sweep(cfg, threads));
            return out.str();
        };
        const std::string one = csv(1);
        o.require(one == csv(2) && one == csv(4), "byte-identical CSV for 1, 2, 4 threads");
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu: %s (%.1f s) %s\n", k + 1, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}

#pragma once

// Monte Carlo drivers. Trials are grouped into fixed-size blocks that worker
// threads claim in any order; finished blocks are merged strictly in block
// order and early stopping is decided only at block boundaries, so results
// depend on the seed alone and never on the number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pnd/analysis.hpp"
#include "pnd/channel_sim.hpp"
#include "pnd/config.hpp"
#include "pnd/detectors.hpp"
#include "pnd/oracle.hpp"
#include "pnd/rng.hpp"
#include "pnd/tslot_detectors.hpp"

namespace pnd {

struct SerEstimate {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double ser = 0.0;
    double std_error = 0.0;    // sqrt(p (1 - p) / trials)
    double mean_terms = 0.0;   // over every metric evaluated
    int max_terms = 0;
    std::uint64_t flags = 0;   // metrics that hit max_terms or were clamped
};

/// Raw counts of a run of trials; merging is exact and order-independent.
struct TrialTally {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t term_sum = 0;
    std::uint64_t flags = 0;
    int max_terms = 0;

    void add_decision(const DecisionResult& d, bool error) {
        errors += error ? 1 : 0;
        for (int t : d.terms_used) {
            term_sum += static_cast<std::uint64_t>(t);
            max_terms = std::max(max_terms, t);
        }
        evaluations += d.terms_used.size();
        flags += static_cast<std::uint64_t>(d.flagged);
    }

    void merge(const TrialTally& o) {
        trials += o.trials;
        errors += o.errors;
        evaluations += o.evaluations;
        term_sum += o.term_sum;
        flags += o.flags;
        max_terms = std::max(max_terms, o.max_terms);
    }

    SerEstimate estimate() const {
        SerEstimate e;
        e.trials = trials;
        e.errors = errors;
        e.ser = trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
        e.std_error = trials == 0 ? 0.0 : std::sqrt(e.ser * (1.0 - e.ser) / static_cast<double>(trials));
        e.mean_terms = evaluations == 0 ? 0.0 : static_cast<double>(term_sum) / static_cast<double>(evaluations);
        e.max_terms = max_terms;
        e.flags = flags;
        return e;
    }
};

struct RunControl {
    std::uint64_t trials = 100000;
    std::uint64_t target_errors = 200;  // 0 disables early stopping
    std::uint64_t block_size = 1000;
    unsigned threads = 1;
};

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs trial(index, tally) for index = 0, 1, ... in blocks. After merging
/// block k in order, the run stops if the error target has been reached.
/// trial() must derive all randomness from its index.
template <class Trial>
TrialTally run_blocks(const RunControl& ctl, Trial trial) {
    const std::uint64_t block = std::max<std::uint64_t>(1, ctl.block_size);
    const std::uint64_t n_blocks = (ctl.trials + block - 1) / block;
    std::vector<std::optional<TrialTally>> done(n_blocks);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::uint64_t frontier = 0;
    TrialTally total;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            if (stop.load()) return;
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            TrialTally local;
            try {
                const std::uint64_t first = b * block;
                const std::uint64_t last = std::min(ctl.trials, first + block);
                for (std::uint64_t i = first; i < last; ++i) {
                    trial(i, local);
                    ++local.trials;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                stop.store(true);
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            done[b] = local;
            while (frontier < n_blocks && done[frontier].has_value() && !stop.load()) {
                total.merge(*done[frontier]);
                ++frontier;
                if (ctl.target_errors > 0 && total.errors >= ctl.target_errors) stop.store(true);
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(ctl.threads, static_cast<unsigned>(n_blocks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return total;
}

/// Seed of one grid point, derived from the master seed and the point's
/// position in the sweep.
inline std::uint64_t point_seed(std::uint64_t master, std::uint64_t point) {
    return splitmix64(master + 0x9e3779b97f4a7c15ULL * (point + 1));
}

template <class Rng>
int uniform_symbol(const Constellation& c, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(c.size()) - 1);
    return pick(rng);
}

/// Detection of one two-slot observation by the configured rule.
inline DecisionResult apply_detector(DetectorKind kind, const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy) {
    switch (kind) {
        case DetectorKind::MaximumLikelihood:
            return detect_two_slot(scn, rx, policy);
        case DetectorKind::VonMisesClosedForm:
            return detect_fc_von_mises(scn, rx);
        case DetectorKind::HighSnrNs: {
            std::vector<double> psi(rx.pilot.size());
            for (std::size_t m = 0; m < psi.size(); ++m) psi[m] = std::arg(std::conj(rx.pilot[m]) * rx.data[0][m]);
            return detect_high_snr_ns(psi, scn.constellation);
        }
        case DetectorKind::MinDistanceFcNs: {
            if (!(scn.rho > 0.0)) throw std::invalid_argument("min-distance rule needs rho > 0");
            ComplexVector v(rx.pilot.size());
            for (std::size_t m = 0; m < v.size(); ++m) v[m] = std::conj(rx.pilot[m]) * rx.data[0][m] / scn.rho;
            return detect_min_distance_fc_ns(v, scn.constellation);
        }
    }
    throw std::logic_error("unknown detector kind");
}

/// SER of one two-slot scenario with uniformly drawn symbols.
inline SerEstimate estimate_ser(const Scenario& scn, DetectorKind kind, const TruncationPolicy& policy, const RunControl& ctl,
                                std::uint64_t seed) {
    scn.validate();
    const auto tally = run_blocks(ctl, [&](std::uint64_t i, TrialTally& t) {
        auto sym_rng = substream(seed, i, StreamRole::Symbols);
        const int s = uniform_symbol(scn.constellation, sym_rng);
        auto rng = substream(seed, i, StreamRole::Channel);
        const auto obs = simulate_two_slot(scn, s, rng);
        const auto d = apply_detector(kind, scn, obs.received, policy);
        t.add_decision(d, d.argmax_index != s);
    });
    return tally.estimate();
}

enum class TSlotRule { DecisionFeedbackNs, GenieS };

/// Per-symbol SER of a T-slot detector; each trial contributes T decisions.
inline SerEstimate estimate_tslot_ser(const Scenario& scn, TSlotRule rule, const TruncationPolicy& policy, const RunControl& ctl,
                                      std::uint64_t seed) {
    const TSlotDetector detector(scn, policy);
    const auto tally = run_blocks(ctl, [&](std::uint64_t i, TrialTally& t) {
        auto sym_rng = substream(seed, i, StreamRole::Symbols);
        std::vector<int> symbols(static_cast<std::size_t>(scn.slots));
        for (auto& s : symbols) s = uniform_symbol(scn.constellation, sym_rng);
        auto rng = substream(seed, i, StreamRole::Channel);
        const auto obs = simulate_t_slot(scn, symbols, rng);
        const auto decisions = rule == TSlotRule::DecisionFeedbackNs ? detector.detect_df_ns(obs.received)
                                                                     : detector.detect_genie_s(obs.received, obs.truth);
        for (std::size_t k = 0; k < decisions.size(); ++k) {
            t.add_decision(decisions[k], decisions[k].argmax_index != symbols[k]);
        }
        // run_blocks counts one trial per sequence; the remaining T - 1 decisions are added here.
        t.trials += symbols.size() - 1;
    });
    return tally.estimate();
}

struct SweepRow {
    std::string scenario;
    ChannelKind channel = ChannelKind::Constant;
    Oscillators oscillators = Oscillators::Synchronous;
    int antennas = 1;
    int constellation_size = 0;
    std::string model_family;
    double model_param = 0.0;
    double rho_db = 0.0;
    SerEstimate estimate;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline Scenario make_scenario(const SweepConfig& cfg, const ScenarioKind& kind, const ModelSpec& model, const ConstellationSpec& con,
                              int antennas, double rho_db) {
    Scenario scn;
    scn.channel = kind.channel;
    scn.oscillators = kind.oscillators;
    scn.rho = db_to_linear(rho_db);
    scn.antennas = antennas;
    if (kind.channel == ChannelKind::Constant) scn.gains = cfg.gains;
    scn.constellation = con.build();
    scn.noise = {model.build()};
    scn.slots = 1;
    scn.noiseless = cfg.noiseless;
    return scn;
}

inline RunControl run_control(const SweepConfig& cfg, unsigned threads) {
    return {cfg.trials, cfg.target_errors, cfg.block_size, threads};
}

/// SER for every (scenario, model, constellation, M, rho) of the grid.
inline std::vector<SweepRow> run_ser_sweep(const SweepConfig& cfg, unsigned threads = default_threads()) {
    cfg.validate();
    std::vector<SweepRow> rows;
    std::uint64_t point = 0;
    for (const auto& kind : cfg.scenarios) {
        for (const auto& model : cfg.models) {
            for (const auto& con : cfg.constellations) {
                for (int m : cfg.antennas) {
                    for (double db : cfg.rho_db) {
                        const Scenario scn = make_scenario(cfg, kind, model, con, m, db);
                        SweepRow row{scn.name(), kind.channel, kind.oscillators, m, static_cast<int>(scn.constellation.size()),
                                     model.family, model.parameter, db, {}};
                        row.estimate = estimate_ser(scn, cfg.detector, cfg.truncation, run_control(cfg, threads), point_seed(cfg.seed, point++));
                        rows.push_back(std::move(row));
                    }
                }
            }
        }
    }
    return rows;
}

/// Truncation statistics (mean and max terms per metric) over a sweep. The
/// rows carry the full SER estimate; mean_terms and max_terms are the
/// statistics of interest.
inline std::vector<SweepRow> run_truncation_stats(const SweepConfig& cfg, unsigned threads = default_threads()) {
    if (cfg.detector != DetectorKind::MaximumLikelihood) throw std::invalid_argument("truncation statistics need the series detector");
    return run_ser_sweep(cfg, threads);
}

/// DF-NS against genie-S for each channel kind listed in the config.
inline std::vector<SweepRow> run_tslot_comparison(const SweepConfig& cfg, unsigned threads = default_threads()) {
    cfg.validate();
    std::vector<ChannelKind> channels;
    for (const auto& k : cfg.scenarios) {
        if (std::find(channels.begin(), channels.end(), k.channel) == channels.end()) channels.push_back(k.channel);
    }
    std::vector<SweepRow> rows;
    std::uint64_t point = 0;
    for (ChannelKind ch : channels) {
        for (const auto& model : cfg.models) {
            for (const auto& con : cfg.constellations) {
                for (int m : cfg.antennas) {
                    for (double db : cfg.rho_db) {
                        for (TSlotRule rule : {TSlotRule::DecisionFeedbackNs, TSlotRule::GenieS}) {
                            const bool df = rule == TSlotRule::DecisionFeedbackNs;
                            const ScenarioKind kind{ch, df ? Oscillators::NonSynchronous : Oscillators::Synchronous};
                            Scenario scn = make_scenario(cfg, kind, model, con, m, db);
                            scn.slots = cfg.slots;
                            SweepRow row{scn.name() + (df ? "-DF" : "-GENIE"), ch, kind.oscillators, m,
                                         static_cast<int>(scn.constellation.size()), model.family, model.parameter, db, {}};
                            row.estimate = estimate_tslot_ser(scn, rule, cfg.truncation, run_control(cfg, threads), point_seed(cfg.seed, point++));
                            rows.push_back(std::move(row));
                        }
                    }
                }
            }
        }
    }
    return rows;
}

struct FloorBoundRow {
    std::string model_family;
    double model_param = 0.0;
    int psk_order = 4;
    int antennas = 1;
    double rho_db = 0.0;  // +inf for the noiseless limit
    std::optional<FloorReport> floor;
    std::optional<SerEstimate> cc_s;
    std::optional<SerEstimate> fc_s;
    std::optional<double> bernstein_union;
    std::optional<SerEstimate> high_snr_ns;
    std::optional<double> chebyshev_union;
    std::optional<SerEstimate> min_distance_fc_ns;
};

struct FloorBoundParts {
    bool floors = true;
    bool bounds = true;
};

/// Analytic floors and bounds next to Monte Carlo SER at the largest rho of
/// the grid, one row per (model, N, M). Floors are compared with the ML
/// detectors of CC-S and FC-S, the bounds with the high-SNR NS rule on CC-NS
/// and the minimum-distance rule on FC-NS.
inline std::vector<FloorBoundRow> run_floor_and_bounds(const SweepConfig& cfg, FloorBoundParts parts = {},
                                                       unsigned threads = default_threads()) {
    cfg.validate();
    const double top = *std::max_element(cfg.rho_db.begin(), cfg.rho_db.end());
    std::vector<FloorBoundRow> rows;
    std::uint64_t point = 0;
    for (const auto& model_spec : cfg.models) {
        const PhaseNoiseModel model = model_spec.build();
        const auto* vm = std::get_if<VonMises>(&model.sampler());
        const bool bounded = vm != nullptr && vm->kappa > 0.0;
        for (const auto& con_spec : cfg.constellations) {
            const Constellation con = con_spec.build();
            if (!con.is_psk()) throw std::invalid_argument("floors and bounds are defined for PSK only");
            const int n = static_cast<int>(con.size());
            for (int m : cfg.antennas) {
                FloorBoundRow row;
                row.model_family = model_spec.family;
                row.model_param = model_spec.parameter;
                row.psk_order = n;
                row.antennas = m;
                row.rho_db = cfg.noiseless ? std::numeric_limits<double>::infinity() : top;
                auto run = [&](ChannelKind ch, Oscillators os, DetectorKind det) {
                    const Scenario scn = make_scenario(cfg, {ch, os}, model_spec, con_spec, m, top);
                    return estimate_ser(scn, det, cfg.truncation, run_control(cfg, threads), point_seed(cfg.seed, point++));
                };
                if (parts.floors) {
                    row.floor = ser_floor_sync(model, n);
                    row.cc_s = run(ChannelKind::Constant, Oscillators::Synchronous, DetectorKind::MaximumLikelihood);
                    row.fc_s = run(ChannelKind::Fading, Oscillators::Synchronous, DetectorKind::MaximumLikelihood);
                }
                if (parts.bounds) {
                    if (bounded) {
                        row.bernstein_union = bernstein_union_bound(vm->kappa, n, m);
                        row.chebyshev_union = chebyshev_union_bound(vm->kappa, n, m);
                    }
                    row.high_snr_ns = run(ChannelKind::Constant, Oscillators::NonSynchronous, DetectorKind::HighSnrNs);
                    row.min_distance_fc_ns = run(ChannelKind::Fading, Oscillators::NonSynchronous, DetectorKind::MinDistanceFcNs);
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

struct ValidationCase {
    std::string scenario;
    int passed = 0;
    int instances = 0;
    double worst_error = 0.0;
    std::string worst_instance;  // dump of the instance with the largest error
};

struct ValidationReport {
    std::vector<ValidationCase> cases;
    double tolerance = 0.0;

    bool passed() const {
        for (const auto& c : cases) {
            if (c.passed != c.instances) return false;
        }
        return !cases.empty();
    }
};

namespace detail {

inline std::string dump_instance(const Scenario& scn, const ReceivedSignals& rx, const DecisionResult& d, const OracleResult& o) {
    std::ostringstream out;
    out.precision(17);
    out << scn.name() << " M=" << scn.antennas << " rho=" << scn.rho << " model=" << scn.noise_model(0).family() << "("
        << scn.noise_model(0).parameter() << ")\n  x =";
    for (const auto& v : rx.pilot) out << ' ' << v;
    out << "\n  y =";
    for (const auto& v : rx.data[0]) out << ' ' << v;
    out << "\n  series metrics =";
    for (double v : d.metrics) out << ' ' << v;
    out << "\n  oracle log-likelihoods =";
    for (double v : o.log_likelihood) out << ' ' << v;
    out << "\n  oracle grid = " << o.grid_points << (o.converged ? "" : " (not converged)");
    return out.str();
}

}  // namespace detail

/// Series detectors against the quadrature oracle on random small instances
/// of all four scenarios. Metric differences L_s - L_0 must agree with the
/// oracle's log-likelihood differences within the tolerance.
inline ValidationReport run_oracle_validation(const ValidationConfig& vc, std::uint64_t seed, unsigned threads = default_threads(),
                                              const TruncationPolicy& policy = {}) {
    if (vc.instances < 1) throw std::invalid_argument("validation: at least one instance required");
    if (vc.max_antennas < 1) throw std::invalid_argument("validation: max_antennas must be >= 1");
    if (!(vc.max_rho > 0.0)) throw std::invalid_argument("validation: max_rho must be positive");
    if (vc.max_antennas > kOracleMaxAntennas || vc.max_rho > kOracleMaxRho) {
        throw std::invalid_argument("validation: the oracle is limited to M <= " + std::to_string(kOracleMaxAntennas) +
                                    " and rho <= " + std::to_string(kOracleMaxRho) + " (linear)");
    }
    ValidationReport report;
    report.tolerance = vc.tolerance;
    const std::vector<ScenarioKind> kinds{{ChannelKind::Constant, Oscillators::Synchronous},
                                          {ChannelKind::Constant, Oscillators::NonSynchronous},
                                          {ChannelKind::Fading, Oscillators::Synchronous},
                                          {ChannelKind::Fading, Oscillators::NonSynchronous}};
    const PhaseNoiseModel model = fourier_von_mises(vc.kappa);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        const std::uint64_t case_seed = point_seed(seed, k);
        std::vector<double> errors(static_cast<std::size_t>(vc.instances));
        std::vector<std::string> dumps(static_cast<std::size_t>(vc.instances));
        const RunControl ctl{static_cast<std::uint64_t>(vc.instances), 0, 1, threads};
        run_blocks(ctl, [&](std::uint64_t i, TrialTally&) {
            auto pick = substream(case_seed, i, StreamRole::Instance);
            std::uniform_int_distribution<int> antennas(1, vc.max_antennas);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Scenario scn;
            scn.channel = kinds[k].channel;
            scn.oscillators = kinds[k].oscillators;
            scn.antennas = antennas(pick);
            // Log-uniform SNR between -10 dB and max_rho.
            const double lo = -1.0;
            const double hi = std::log10(vc.max_rho);
            scn.rho = std::pow(10.0, lo + (hi - lo) * unit(pick));
            scn.noise = {model};
            auto sym_rng = substream(case_seed, i, StreamRole::Symbols);
            const int s = uniform_symbol(scn.constellation, sym_rng);
            auto rng = substream(case_seed, i, StreamRole::Channel);
            const auto obs = simulate_two_slot(scn, s, rng);
            const auto d = detect_two_slot(scn, obs.received, policy);
            const auto o = oracle_log_likelihoods(scn, obs.received);
            double worst = o.converged ? 0.0 : std::numeric_limits<double>::infinity();
            for (std::size_t j = 1; j < d.metrics.size(); ++j) {
                const double diff = (d.metrics[j] - d.metrics[0]) - (o.log_likelihood[j] - o.log_likelihood[0]);
                worst = std::max(worst, std::abs(diff));
            }
            if (!std::isfinite(worst) || std::isnan(worst)) worst = std::numeric_limits<double>::infinity();
            errors[i] = worst;
            dumps[i] = detail::dump_instance(scn, obs.received, d, o);
        });
        ValidationCase vcase;
        vcase.scenario = to_string(kinds[k].channel) + "-" + to_string(kinds[k].oscillators);
        vcase.instances = vc.instances;
        std::size_t worst_index = 0;
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (errors[i] <= vc.tolerance) ++vcase.passed;
            if (errors[i] > errors[worst_index]) worst_index = i;
        }
        vcase.worst_error = errors[worst_index];
        vcase.worst_instance = dumps[worst_index];
        report.cases.push_back(std::move(vcase));
    }
    return report;
}

}  // namespace pnd

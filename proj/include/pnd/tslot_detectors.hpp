#pragma once

// Symbol-by-symbol detectors for one pilot slot followed by T data slots:
// a causal decision-feedback detector for non-synchronous oscillators and a
// genie-aided detector for the synchronous case, which is told the true past
// symbols and the accumulated phase.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pnd/channel_sim.hpp"
#include "pnd/detectors.hpp"
#include "pnd/phase_noise.hpp"
#include "pnd/series.hpp"
#include "pnd/special_functions.hpp"

namespace pnd {

/// Running quantities of one decoded sequence.
struct TSlotDetectorState {
    int slot = 0;                  // data slots decided so far (t - 1)
    std::vector<int> history;      // decisions (DF) or true symbols (genie)
    std::vector<double> energy;    // per antenna: sum_{tau<t} |d_m[tau] s_tau|^2
    ComplexVector combined;        // per antenna: x_m + sum_{tau<t} d_m[tau] conj(s_tau) y_m[tau]

    /// a_m[t] = 1 + rho + rho * energy_m.
    double a(double rho, std::size_t m) const { return 1.0 + rho + rho * energy[m]; }
};

/// Accumulated-increment models for every slot of a scenario. Built once and
/// reused across trials.
class TSlotDetector {
public:
    TSlotDetector(const Scenario& scn, const TruncationPolicy& policy = {}) : scn_(scn), policy_(policy) {
        scn_.validate();
        policy_.validate();
        accumulated_.resize(static_cast<std::size_t>(scn_.slots));
        for (int t = 1; t <= scn_.slots; ++t) {
            auto& row = accumulated_[static_cast<std::size_t>(t - 1)];
            for (const auto& model : scn_.noise) row.push_back(convolve_iid(model, t));
        }
    }

    const Scenario& scenario() const { return scn_; }

    /// Model of phi_m[1] + ... + phi_m[t].
    const PhaseNoiseModel& accumulated(int t, int m) const {
        const auto& row = accumulated_[static_cast<std::size_t>(t - 1)];
        return row.size() == 1 ? row.front() : row[static_cast<std::size_t>(m)];
    }

    /// Mean phasor d_m[t] = E[exp(j(phi_m[1] + ... + phi_m[t]))].
    double mean_phasor(int t, int m) const { return accumulated(t, m).coefficient(1); }

    TSlotDetectorState initial_state(const ReceivedSignals& rx) const {
        check(rx);
        TSlotDetectorState st;
        st.energy.assign(static_cast<std::size_t>(scn_.antennas), 0.0);
        st.combined = rx.pilot;
        return st;
    }

    /// Decides slot st.slot + 1 by decision feedback and feeds the decision back.
    DecisionResult df_ns_step(const ReceivedSignals& rx, TSlotDetectorState& st) const {
        if (scn_.oscillators != Oscillators::NonSynchronous) throw std::invalid_argument("decision feedback detector needs NS operation");
        const int t = st.slot + 1;
        if (t > scn_.slots) throw std::out_of_range("all data slots already decided");
        const auto& y = rx.data[static_cast<std::size_t>(t - 1)];
        DecisionResult r = scn_.channel == ChannelKind::Constant ? df_cc(y, st, t) : df_fc(y, st, t);
        advance(rx, st, r.argmax_index, [&](int m) { return mean_phasor(t, m); });
        return r;
    }

    std::vector<DecisionResult> detect_df_ns(const ReceivedSignals& rx) const {
        auto st = initial_state(rx);
        std::vector<DecisionResult> out;
        for (int t = 0; t < scn_.slots; ++t) out.push_back(df_ns_step(rx, st));
        return out;
    }

    /// Decides slot st.slot + 1 with the true past symbols and phases, then
    /// feeds the true symbol back.
    DecisionResult genie_s_step(const ReceivedSignals& rx, const TruthRecord& truth, TSlotDetectorState& st) const {
        if (scn_.oscillators != Oscillators::Synchronous) throw std::invalid_argument("genie-aided detector needs S operation");
        const int t = st.slot + 1;
        if (t > scn_.slots) throw std::out_of_range("all data slots already decided");
        if (truth.symbols.size() < static_cast<std::size_t>(t) || truth.accumulated.size() < static_cast<std::size_t>(t) ||
            truth.initial_phase.empty()) {
            throw std::invalid_argument("genie-aided detector needs the truth record");
        }
        // Accumulated phase up to t - 1.
        const double past = t == 1 ? 0.0 : truth.accumulated[static_cast<std::size_t>(t - 2)][0];
        const auto& y = rx.data[static_cast<std::size_t>(t - 1)];
        DecisionResult r = scn_.channel == ChannelKind::Constant ? genie_cc(y, truth.initial_phase[0] + past)
                                                                 : genie_fc(y, st, past);
        const int true_symbol = truth.symbols[static_cast<std::size_t>(t - 1)];
        const double phase = truth.accumulated[static_cast<std::size_t>(t - 1)][0];
        advance(rx, st, true_symbol, [](int) { return 1.0; }, phase);
        return r;
    }

    std::vector<DecisionResult> detect_genie_s(const ReceivedSignals& rx, const TruthRecord& truth) const {
        auto st = initial_state(rx);
        std::vector<DecisionResult> out;
        for (int t = 0; t < scn_.slots; ++t) out.push_back(genie_s_step(rx, truth, st));
        return out;
    }

private:
    void check(const ReceivedSignals& rx) const {
        const auto m = static_cast<std::size_t>(scn_.antennas);
        if (rx.pilot.size() != m) throw std::invalid_argument("detector: pilot length does not match M");
        if (rx.data.size() != static_cast<std::size_t>(scn_.slots)) throw std::invalid_argument("detector: expected T data slots");
        for (const auto& y : rx.data) {
            if (y.size() != m) throw std::invalid_argument("detector: data length does not match M");
        }
    }

    template <class Weight>
    void advance(const ReceivedSignals& rx, TSlotDetectorState& st, int symbol, Weight weight, double derotate = 0.0) const {
        const auto& y = rx.data[static_cast<std::size_t>(st.slot)];
        const Complex s = scn_.constellation[static_cast<std::size_t>(symbol)];
        const Complex turn = std::polar(1.0, -derotate);
        for (std::size_t m = 0; m < st.combined.size(); ++m) {
            const double d = weight(static_cast<int>(m));
            st.combined[m] += d * std::conj(s) * turn * y[m];
            st.energy[m] += std::norm(d * s);
        }
        st.history.push_back(symbol);
        ++st.slot;
    }

    DecisionResult df_cc(const ComplexVector& y, const TSlotDetectorState& st, int t) const {
        const auto& con = scn_.constellation;
        const auto m_count = static_cast<std::size_t>(scn_.antennas);
        const double root = std::sqrt(scn_.rho);
        const auto rings = detail::rings_of(con);
        auto result = detail::empty_result(con.size());
        std::vector<BesselProfile> pilot(m_count);
        for (std::size_t m = 0; m < m_count; ++m) {
            const auto& model = accumulated(t, static_cast<int>(m));
            pilot[m].assign(2.0 * root * scn_.gain(static_cast<int>(m)) * std::abs(st.combined[m]), detail::series_order(model, policy_));
        }
        std::vector<std::vector<double>> coeffs(m_count);
        std::vector<double> scale(m_count);
        std::vector<CosineSeries> series(m_count);
        BesselProfile data;
        for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
            const double mu = rings.magnitude[k];
            for (std::size_t m = 0; m < m_count; ++m) {
                const auto& model = accumulated(t, static_cast<int>(m));
                data.assign(2.0 * root * scn_.gain(static_cast<int>(m)) * mu * std::abs(y[m]), detail::series_order(model, policy_));
                detail::product_coefficients(model, data, &pilot[m], coeffs[m]);
                scale[m] = data.log_i0 + pilot[m].log_i0;
            }
            const double offset = -scn_.rho * mu * mu * scn_.gain_norm_sq();
            for (std::size_t s : rings.members[k]) {
                const double phase = detail::symbol_angle(con, s);
                for (std::size_t m = 0; m < m_count; ++m) {
                    // arg B_m - arg c_m with B_m = conj(y_m) g_m s and c_m = conj(combined_m).
                    series[m] = {scale[m], coeffs[m], phase - std::arg(y[m]) + std::arg(st.combined[m])};
                }
                detail::record(result, s, truncated_metric(offset, series, policy_));
            }
        }
        detail::finish(result);
        return result;
    }

    DecisionResult df_fc(const ComplexVector& y, const TSlotDetectorState& st, int t) const {
        const auto& con = scn_.constellation;
        const auto m_count = static_cast<std::size_t>(scn_.antennas);
        const double rho = scn_.rho;
        const auto rings = detail::rings_of(con);
        auto result = detail::empty_result(con.size());
        std::vector<std::vector<double>> coeffs(m_count);
        std::vector<double> scale(m_count);
        std::vector<CosineSeries> series(m_count);
        BesselProfile profile;
        for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
            const double mu = rings.magnitude[k];
            double offset = 0.0;
            for (std::size_t m = 0; m < m_count; ++m) {
                const auto& model = accumulated(t, static_cast<int>(m));
                const double denom = st.a(rho, m) + rho * mu * mu;
                const double chi = mu * std::abs(st.combined[m]) * std::abs(y[m]);
                profile.assign(2.0 * rho * chi / denom, detail::series_order(model, policy_));
                detail::product_coefficients(model, profile, nullptr, coeffs[m]);
                scale[m] = profile.log_i0;
                offset += -std::log(denom) + rho * (std::norm(st.combined[m]) + std::norm(y[m]) * mu * mu) / denom;
            }
            for (std::size_t s : rings.members[k]) {
                const double phase = detail::symbol_angle(con, s);
                for (std::size_t m = 0; m < m_count; ++m) {
                    // arg of chi_m = combined_m conj(y_m) s.
                    series[m] = {scale[m], coeffs[m], std::arg(st.combined[m]) - std::arg(y[m]) + phase};
                }
                detail::record(result, s, truncated_metric(offset, series, policy_));
            }
        }
        detail::finish(result);
        return result;
    }

    DecisionResult genie_cc(const ComplexVector& y, double known_phase) const {
        const auto& con = scn_.constellation;
        const auto& model = scn_.noise_model(0);
        const double root = std::sqrt(scn_.rho);
        Complex yhg{};
        for (int m = 0; m < scn_.antennas; ++m) yhg += std::conj(y[static_cast<std::size_t>(m)]) * scn_.gain(m);
        const auto rings = detail::rings_of(con);
        auto result = detail::empty_result(con.size());
        BesselProfile profile;
        std::vector<double> coeffs;
        for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
            const double mu = rings.magnitude[k];
            profile.assign(2.0 * root * mu * std::abs(yhg), detail::series_order(model, policy_));
            detail::product_coefficients(model, profile, nullptr, coeffs);
            const double offset = -scn_.rho * mu * mu * scn_.gain_norm_sq();
            for (std::size_t s : rings.members[k]) {
                const CosineSeries one{profile.log_i0, coeffs, known_phase + detail::symbol_angle(con, s) + std::arg(yhg)};
                detail::record(result, s, truncated_metric(offset, std::span<const CosineSeries>(&one, 1), policy_));
            }
        }
        detail::finish(result);
        return result;
    }

    DecisionResult genie_fc(const ComplexVector& y, const TSlotDetectorState& st, double known_phase) const {
        const auto& con = scn_.constellation;
        const auto& model = scn_.noise_model(0);
        const double rho = scn_.rho;
        const double a = st.a(rho, 0);
        Complex vhy{};
        for (std::size_t m = 0; m < y.size(); ++m) vhy += std::conj(st.combined[m]) * y[m];
        const double v_energy = detail::squared_norm(st.combined);
        const double y_energy = detail::squared_norm(y);
        const auto rings = detail::rings_of(con);
        auto result = detail::empty_result(con.size());
        BesselProfile profile;
        std::vector<double> coeffs;
        for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
            const double mu = rings.magnitude[k];
            const double denom = a + rho * mu * mu;
            profile.assign(2.0 * rho * mu * std::abs(vhy) / denom, detail::series_order(model, policy_));
            detail::product_coefficients(model, profile, nullptr, coeffs);
            const double offset = rho * (v_energy + mu * mu * y_energy) / denom - scn_.antennas * std::log(denom);
            for (std::size_t s : rings.members[k]) {
                // chi = conj(s) v^H y.
                const double zeta = known_phase - (std::arg(vhy) - detail::symbol_angle(con, s));
                const CosineSeries one{profile.log_i0, coeffs, zeta};
                detail::record(result, s, truncated_metric(offset, std::span<const CosineSeries>(&one, 1), policy_));
            }
        }
        detail::finish(result);
        return result;
    }

    Scenario scn_;
    TruncationPolicy policy_;
    std::vector<std::vector<PhaseNoiseModel>> accumulated_;  // [t-1][model]
};

inline std::vector<DecisionResult> detect_tslot_df_ns(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy = {}) {
    return TSlotDetector(scn, policy).detect_df_ns(rx);
}

inline std::vector<DecisionResult> detect_tslot_genie_s(const Scenario& scn, const Observation& obs, const TruncationPolicy& policy = {}) {
    return TSlotDetector(scn, policy).detect_genie_s(obs.received, obs.truth);
}

}  // namespace pnd

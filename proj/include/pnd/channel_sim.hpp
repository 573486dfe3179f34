#pragma once

// Synthetic pilot + data observations for the constant-channel (CC) and
// Rayleigh fading-channel (FC) SIMO models, with one shared oscillator
// (synchronous) or one oscillator per antenna (non-synchronous).

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnd/constellation.hpp"
#include "pnd/phase_noise.hpp"
#include "pnd/rng.hpp"

namespace pnd {

enum class ChannelKind { Constant, Fading };
enum class Oscillators { Synchronous, NonSynchronous };

inline std::string to_string(ChannelKind c) { return c == ChannelKind::Constant ? "CC" : "FC"; }
inline std::string to_string(Oscillators o) { return o == Oscillators::Synchronous ? "S" : "NS"; }

struct Scenario {
    ChannelKind channel = ChannelKind::Constant;
    Oscillators oscillators = Oscillators::Synchronous;
    double rho = 1.0;  // linear SNR at unit amplitude
    int antennas = 1;
    std::vector<double> gains;  // CC amplitudes g_m; empty means all ones
    Constellation constellation = Constellation::psk(4);
    std::vector<PhaseNoiseModel> noise;  // one shared model, or one per antenna (NS only)
    int slots = 1;                       // data slots T
    bool noiseless = false;              // drop the AWGN terms (test hook)

    std::string name() const { return to_string(channel) + "-" + to_string(oscillators); }

    double gain(int m) const { return gains.empty() ? 1.0 : gains[static_cast<std::size_t>(m)]; }

    double gain_norm_sq() const {
        double s = 0.0;
        for (int m = 0; m < antennas; ++m) s += gain(m) * gain(m);
        return s;
    }

    const PhaseNoiseModel& noise_model(int m) const {
        return noise.size() == 1 ? noise.front() : noise[static_cast<std::size_t>(m)];
    }

    void validate() const {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("scenario: rho must be finite and >= 0");
        if (antennas < 1) throw std::invalid_argument("scenario: at least one antenna required");
        if (slots < 1) throw std::invalid_argument("scenario: at least one data slot required");
        if (channel == ChannelKind::Constant && !gains.empty()) {
            if (gains.size() != static_cast<std::size_t>(antennas)) throw std::invalid_argument("scenario: gain vector length must equal M");
            for (double g : gains) {
                if (!(g > 0.0)) throw std::invalid_argument("scenario: gains must be positive");
            }
        }
        if (noise.empty()) throw std::invalid_argument("scenario: phase noise model missing");
        if (noise.size() != 1 && noise.size() != static_cast<std::size_t>(antennas)) {
            throw std::invalid_argument("scenario: give one shared phase noise model or one per antenna");
        }
        if (oscillators == Oscillators::Synchronous && noise.size() != 1) {
            throw std::invalid_argument("scenario: synchronous operation uses a single oscillator model");
        }
    }
};

/// What the receiver sees: pilot slot x and data slots y_1..y_T.
struct ReceivedSignals {
    ComplexVector pilot;
    std::vector<ComplexVector> data;
};

/// Hidden draws kept only for scoring and genie-aided detection.
struct TruthRecord {
    std::vector<int> symbols;                      // s_1..s_T as constellation indices
    std::vector<double> initial_phase;             // theta_m (CC); zeros for FC
    std::vector<std::vector<double>> increments;   // [t][m] phi_m[t]
    std::vector<std::vector<double>> accumulated;  // [t][m] sum_{tau<=t} phi_m[tau], unwrapped
    ComplexVector channel;                         // h (FC); empty for CC
};

struct Observation {
    ReceivedSignals received;
    TruthRecord truth;
};

namespace detail {

template <class Rng>
std::vector<double> draw_phases(const Scenario& scn, Rng& rng, bool uniform_reference) {
    const auto m_count = static_cast<std::size_t>(scn.antennas);
    std::vector<double> out(m_count);
    auto draw = [&](int m) {
        if (uniform_reference) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            return wrap_phase(std::numbers::pi * (2.0 * unit(rng) - 1.0));
        }
        return sample_phase(scn.noise_model(m), rng);
    };
    if (scn.oscillators == Oscillators::Synchronous) {
        const double shared = draw(0);
        for (auto& v : out) v = shared;
    } else {
        for (int m = 0; m < scn.antennas; ++m) out[static_cast<std::size_t>(m)] = draw(m);
    }
    return out;
}

}  // namespace detail

/// Draws one pilot slot followed by symbols.size() data slots. The phase at
/// data slot t carries the accumulated increments phi[1] + ... + phi[t]; the
/// channel and the initial phase are held over all slots.
template <class Rng>
Observation simulate_t_slot(const Scenario& scn, const std::vector<int>& symbols, Rng& rng) {
    scn.validate();
    if (symbols.size() != static_cast<std::size_t>(scn.slots)) {
        throw std::invalid_argument("simulate_t_slot: symbol list length must equal T");
    }
    for (int s : symbols) {
        if (s < 0 || static_cast<std::size_t>(s) >= scn.constellation.size()) {
            throw std::invalid_argument("simulate: invalid symbol index");
        }
    }
    const auto m_count = static_cast<std::size_t>(scn.antennas);
    const double amp = std::sqrt(scn.rho);
    auto noise = [&]() { return scn.noiseless ? Complex{} : complex_gaussian(rng); };

    Observation obs;
    TruthRecord& truth = obs.truth;
    truth.symbols = symbols;
    truth.initial_phase.assign(m_count, 0.0);

    // Effective per-antenna gain at the pilot: g_m e^{j theta_m} (CC) or h_m (FC).
    ComplexVector base(m_count);
    if (scn.channel == ChannelKind::Constant) {
        truth.initial_phase = detail::draw_phases(scn, rng, true);
        for (std::size_t m = 0; m < m_count; ++m) base[m] = std::polar(scn.gain(static_cast<int>(m)), truth.initial_phase[m]);
    } else {
        truth.channel.resize(m_count);
        for (auto& h : truth.channel) h = complex_gaussian(rng);
        base = truth.channel;
    }

    obs.received.pilot.resize(m_count);
    for (std::size_t m = 0; m < m_count; ++m) obs.received.pilot[m] = amp * base[m] + noise();

    std::vector<double> phase(m_count, 0.0);
    for (int t = 0; t < scn.slots; ++t) {
        auto inc = detail::draw_phases(scn, rng, false);
        for (std::size_t m = 0; m < m_count; ++m) phase[m] += inc[m];
        const Complex s = scn.constellation[static_cast<std::size_t>(symbols[static_cast<std::size_t>(t)])];
        ComplexVector y(m_count);
        for (std::size_t m = 0; m < m_count; ++m) y[m] = amp * std::polar(1.0, phase[m]) * base[m] * s + noise();
        obs.received.data.push_back(std::move(y));
        truth.increments.push_back(std::move(inc));
        truth.accumulated.push_back(phase);
    }
    return obs;
}

template <class Rng>
Observation simulate_two_slot(const Scenario& scn, int symbol, Rng& rng) {
    if (scn.slots != 1) throw std::invalid_argument("simulate_two_slot: scenario must have T = 1");
    return simulate_t_slot(scn, std::vector<int>{symbol}, rng);
}

}  // namespace pnd

#pragma once

// Two-slot ML detectors for the four CC/FC x S/NS scenarios, the von Mises
// closed forms for fading channels and the high-SNR PSK rules.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pnd/channel_sim.hpp"
#include "pnd/constellation.hpp"
#include "pnd/phase_noise.hpp"
#include "pnd/series.hpp"
#include "pnd/special_functions.hpp"

namespace pnd {

struct DecisionResult {
    std::vector<double> metrics;   // one log-metric per constellation point
    int argmax_index = -1;
    std::vector<int> terms_used;   // truncation index nu of each metric
    int flagged = 0;               // metrics that hit max_terms or were clamped
};

/// Relative slack under which two metrics count as tied.
inline constexpr double kTieTolerance = 64.0 * std::numeric_limits<double>::epsilon();

/// Index of the largest entry; near-ties resolve to the lowest index.
inline int argmax_lowest_index(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax of an empty metric list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double a = values[i];
        const double b = values[best];
        const double slack = kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
        if (a > b + slack) best = i;
    }
    return static_cast<int>(best);
}

namespace detail {

inline void finish(DecisionResult& r) { r.argmax_index = argmax_lowest_index(r.metrics); }

inline void record(DecisionResult& r, std::size_t s, const SeriesValue& v) {
    r.metrics[s] = v.log_value;
    r.terms_used[s] = v.terms_used;
    if (v.flagged()) ++r.flagged;
}

inline DecisionResult empty_result(std::size_t n) {
    DecisionResult r;
    r.metrics.assign(n, 0.0);
    r.terms_used.assign(n, 0);
    return r;
}

inline int series_order(const PhaseNoiseModel& model, const TruncationPolicy& policy) {
    return std::min(policy.max_terms, model.order());
}

/// Constellation points grouped by magnitude: every Bessel argument depends
/// on s only through |s|, so one profile serves a whole ring.
struct Rings {
    std::vector<double> magnitude;
    std::vector<std::vector<std::size_t>> members;
};

inline Rings rings_of(const Constellation& c) {
    Rings r;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double mag = c.is_psk() ? 1.0 : std::abs(c[i]);
        auto it = std::find(r.magnitude.begin(), r.magnitude.end(), mag);
        if (it == r.magnitude.end()) {
            r.magnitude.push_back(mag);
            r.members.emplace_back();
            it = r.magnitude.end() - 1;
        }
        r.members[static_cast<std::size_t>(it - r.magnitude.begin())].push_back(i);
    }
    return r;
}

inline double symbol_angle(const Constellation& c, std::size_t i) {
    if (c.is_psk()) return 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(c.size());
    return std::arg(c[i]);
}

/// c_l = alpha_l * a_l (* b_l), the normalized coefficients of one series.
inline void product_coefficients(const PhaseNoiseModel& model, const BesselProfile& a, const BesselProfile* b,
                                 std::vector<double>& out) {
    out.resize(a.relative.size());
    for (std::size_t l = 0; l < out.size(); ++l) {
        double c = model.coefficient(l) * a.relative[l];
        if (b != nullptr) c *= b->relative[l];
        out[l] = c;
    }
}

inline void check_two_slot(const Scenario& scn, const ReceivedSignals& rx) {
    scn.validate();
    const auto m = static_cast<std::size_t>(scn.antennas);
    if (rx.pilot.size() != m) throw std::invalid_argument("detector: pilot length does not match M");
    if (rx.data.size() != 1) throw std::invalid_argument("detector: two-slot detection needs exactly one data slot");
    if (rx.data[0].size() != m) throw std::invalid_argument("detector: data length does not match M");
}

inline double squared_norm(const ComplexVector& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return s;
}

// B for the fading channel at ring magnitude mu.
inline double fading_offset(const Scenario& scn, double mu, double x_energy, double y_energy) {
    const double rho = scn.rho;
    const double k = 1.0 + rho + rho * mu * mu;
    return -scn.antennas * std::log(k) - (1.0 + rho * mu * mu) / k * x_energy - (1.0 + rho) / k * y_energy;
}

inline DecisionResult detect_cc_ns(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy) {
    const auto& x = rx.pilot;
    const auto& y = rx.data[0];
    const auto& con = scn.constellation;
    const auto m_count = static_cast<std::size_t>(scn.antennas);
    const double root = std::sqrt(scn.rho);
    const Rings rings = rings_of(con);
    auto result = empty_result(con.size());

    std::vector<BesselProfile> pilot(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const int order = series_order(scn.noise_model(static_cast<int>(m)), policy);
        pilot[m].assign(2.0 * root * scn.gain(static_cast<int>(m)) * std::abs(x[m]), order);
    }
    std::vector<std::vector<double>> coeffs(m_count);
    std::vector<double> scale(m_count);
    std::vector<CosineSeries> series(m_count);
    BesselProfile data;
    for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
        const double mu = rings.magnitude[k];
        for (std::size_t m = 0; m < m_count; ++m) {
            const auto& model = scn.noise_model(static_cast<int>(m));
            data.assign(2.0 * root * scn.gain(static_cast<int>(m)) * mu * std::abs(y[m]), series_order(model, policy));
            product_coefficients(model, data, &pilot[m], coeffs[m]);
            scale[m] = data.log_i0 + pilot[m].log_i0;
        }
        const double offset = -scn.rho * mu * mu * scn.gain_norm_sq();
        for (std::size_t s : rings.members[k]) {
            const double phase = symbol_angle(con, s);
            for (std::size_t m = 0; m < m_count; ++m) {
                series[m] = {scale[m], coeffs[m], std::arg(y[m]) - std::arg(x[m]) - phase};
            }
            record(result, s, truncated_metric(offset, series, policy));
        }
    }
    finish(result);
    return result;
}

inline DecisionResult detect_fc_ns(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy) {
    const auto& x = rx.pilot;
    const auto& y = rx.data[0];
    const auto& con = scn.constellation;
    const auto m_count = static_cast<std::size_t>(scn.antennas);
    const double rho = scn.rho;
    const double x_energy = squared_norm(x);
    const double y_energy = squared_norm(y);
    const Rings rings = rings_of(con);
    auto result = empty_result(con.size());

    std::vector<std::vector<double>> coeffs(m_count);
    std::vector<double> scale(m_count);
    std::vector<CosineSeries> series(m_count);
    BesselProfile profile;
    for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
        const double mu = rings.magnitude[k];
        const double kk = 1.0 + rho + rho * mu * mu;
        for (std::size_t m = 0; m < m_count; ++m) {
            const auto& model = scn.noise_model(static_cast<int>(m));
            profile.assign(2.0 * rho * mu * std::abs(x[m]) * std::abs(y[m]) / kk, series_order(model, policy));
            product_coefficients(model, profile, nullptr, coeffs[m]);
            scale[m] = profile.log_i0;
        }
        const double offset = fading_offset(scn, mu, x_energy, y_energy);
        for (std::size_t s : rings.members[k]) {
            const double phase = symbol_angle(con, s);
            for (std::size_t m = 0; m < m_count; ++m) {
                series[m] = {scale[m], coeffs[m], std::arg(y[m]) - std::arg(x[m]) - phase};
            }
            record(result, s, truncated_metric(offset, series, policy));
        }
    }
    finish(result);
    return result;
}

inline DecisionResult detect_cc_s(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy) {
    const auto& con = scn.constellation;
    const auto& model = scn.noise_model(0);
    const double root = std::sqrt(scn.rho);
    Complex gx{};
    Complex gy{};
    for (int m = 0; m < scn.antennas; ++m) {
        gx += scn.gain(m) * rx.pilot[static_cast<std::size_t>(m)];
        gy += scn.gain(m) * rx.data[0][static_cast<std::size_t>(m)];
    }
    const Rings rings = rings_of(con);
    auto result = empty_result(con.size());
    const int order = series_order(model, policy);
    const BesselProfile pilot(2.0 * root * std::abs(gx), order);
    BesselProfile data;
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
        const double mu = rings.magnitude[k];
        data.assign(2.0 * root * mu * std::abs(gy), order);
        product_coefficients(model, data, &pilot, coeffs);
        const double offset = -scn.rho * mu * mu * scn.gain_norm_sq();
        for (std::size_t s : rings.members[k]) {
            const double zeta = std::arg(gy) - std::arg(gx) - symbol_angle(con, s);
            const CosineSeries one{data.log_i0 + pilot.log_i0, coeffs, zeta};
            record(result, s, truncated_metric(offset, std::span<const CosineSeries>(&one, 1), policy));
        }
    }
    finish(result);
    return result;
}

inline DecisionResult detect_fc_s(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy) {
    const auto& con = scn.constellation;
    const auto& model = scn.noise_model(0);
    const double rho = scn.rho;
    Complex xhy{};
    for (std::size_t m = 0; m < rx.pilot.size(); ++m) xhy += std::conj(rx.pilot[m]) * rx.data[0][m];
    const double x_energy = squared_norm(rx.pilot);
    const double y_energy = squared_norm(rx.data[0]);
    const Rings rings = rings_of(con);
    auto result = empty_result(con.size());
    const int order = series_order(model, policy);
    BesselProfile profile;
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < rings.magnitude.size(); ++k) {
        const double mu = rings.magnitude[k];
        const double kk = 1.0 + rho + rho * mu * mu;
        profile.assign(2.0 * rho * mu * std::abs(xhy) / kk, order);
        product_coefficients(model, profile, nullptr, coeffs);
        const double offset = fading_offset(scn, mu, x_energy, y_energy);
        for (std::size_t s : rings.members[k]) {
            const CosineSeries one{profile.log_i0, coeffs, std::arg(xhy) - symbol_angle(con, s)};
            record(result, s, truncated_metric(offset, std::span<const CosineSeries>(&one, 1), policy));
        }
    }
    finish(result);
    return result;
}

}  // namespace detail

/// ML detection from one pilot slot and one data slot.
inline DecisionResult detect_two_slot(const Scenario& scn, const ReceivedSignals& rx, const TruncationPolicy& policy = {}) {
    policy.validate();
    detail::check_two_slot(scn, rx);
    const bool sync = scn.oscillators == Oscillators::Synchronous;
    if (scn.channel == ChannelKind::Constant) return sync ? detail::detect_cc_s(scn, rx, policy) : detail::detect_cc_ns(scn, rx, policy);
    return sync ? detail::detect_fc_s(scn, rx, policy) : detail::detect_fc_ns(scn, rx, policy);
}

/// Fading-channel ML detection for von Mises increments in closed form:
/// ln sum_l alpha_l I_l(b) cos(l zeta) = ln I_0(sqrt(k^2 + b^2 + 2 k b cos zeta)) - ln I_0(k).
inline DecisionResult detect_fc_von_mises(const Scenario& scn, const ReceivedSignals& rx) {
    detail::check_two_slot(scn, rx);
    if (scn.channel != ChannelKind::Fading) throw std::invalid_argument("detect_fc_von_mises: fading channel required");
    const auto m_count = static_cast<std::size_t>(scn.antennas);
    std::vector<double> kappa(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const auto& model = scn.noise_model(static_cast<int>(m));
        const auto* vm = std::get_if<VonMises>(&model.sampler());
        if (vm == nullptr || model.increments() != 1) {
            throw std::invalid_argument("detect_fc_von_mises: von Mises phase noise model required");
        }
        kappa[m] = vm->kappa;
    }
    auto term = [](double k, double b, double zeta) {
        const double arg2 = std::max(0.0, k * k + b * b + 2.0 * k * b * std::cos(zeta));
        return log_bessel_i0(std::sqrt(arg2)) - log_bessel_i0(k);
    };

    const auto& x = rx.pilot;
    const auto& y = rx.data[0];
    const auto& con = scn.constellation;
    const double rho = scn.rho;
    const double x_energy = detail::squared_norm(x);
    const double y_energy = detail::squared_norm(y);
    Complex xhy{};
    for (std::size_t m = 0; m < m_count; ++m) xhy += std::conj(x[m]) * y[m];

    auto result = detail::empty_result(con.size());
    for (std::size_t s = 0; s < con.size(); ++s) {
        const double mu = con.is_psk() ? 1.0 : std::abs(con[s]);
        const double phase = detail::symbol_angle(con, s);
        const double kk = 1.0 + rho + rho * mu * mu;
        double metric = detail::fading_offset(scn, mu, x_energy, y_energy);
        if (scn.oscillators == Oscillators::Synchronous) {
            metric += term(kappa[0], 2.0 * rho * mu * std::abs(xhy) / kk, std::arg(xhy) - phase);
        } else {
            for (std::size_t m = 0; m < m_count; ++m) {
                const double b = 2.0 * rho * mu * std::abs(x[m]) * std::abs(y[m]) / kk;
                metric += term(kappa[m], b, std::arg(y[m]) - std::arg(x[m]) - phase);
            }
        }
        result.metrics[s] = metric;
    }
    detail::finish(result);
    return result;
}

/// High-SNR NS rule for PSK: argmax_n sum_m cos(psi_m - 2 pi n / N).
inline DecisionResult detect_high_snr_ns(std::span<const double> psi, const Constellation& con) {
    if (!con.is_psk()) throw std::invalid_argument("detect_high_snr_ns: PSK constellation required");
    if (psi.empty()) throw std::invalid_argument("detect_high_snr_ns: no observations");
    auto result = detail::empty_result(con.size());
    for (std::size_t n = 0; n < con.size(); ++n) {
        const double phase = detail::symbol_angle(con, n);
        double sum = 0.0;
        for (double p : psi) sum += std::cos(p - phase);
        result.metrics[n] = sum;
    }
    detail::finish(result);
    return result;
}

/// Suboptimal FC-NS rule for PSK: nearest point to the sample mean of
/// v_m = conj(x_m) y_m / rho. Metrics are negative squared distances.
inline DecisionResult detect_min_distance_fc_ns(std::span<const Complex> v, const Constellation& con) {
    if (!con.is_psk()) throw std::invalid_argument("detect_min_distance_fc_ns: PSK constellation required");
    if (v.empty()) throw std::invalid_argument("detect_min_distance_fc_ns: no observations");
    Complex mean{};
    for (const auto& z : v) mean += z;
    mean /= static_cast<double>(v.size());
    auto result = detail::empty_result(con.size());
    for (std::size_t n = 0; n < con.size(); ++n) result.metrics[n] = -std::norm(mean - con[n]);
    detail::finish(result);
    return result;
}

}  // namespace pnd

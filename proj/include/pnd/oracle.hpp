#pragma once

// Brute-force likelihoods for small instances. The phases are integrated
// numerically: over (theta, phi) for the constant channel and over phi for
// the fading channel, where h is integrated out through the joint Gaussian
// density of (x_m, y_m). Nothing here shares code with the series detectors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pnd/analysis.hpp"
#include "pnd/channel_sim.hpp"
#include "pnd/phase_noise.hpp"

namespace pnd {

inline constexpr int kOracleMaxAntennas = 3;
inline constexpr double kOracleMaxRho = 10.0;

struct OracleResult {
    std::vector<double> log_likelihood;  // ln p(x, y | s) per constellation point
    int grid_points = 0;                 // per integrated dimension
    bool converged = true;
};

struct OracleOptions {
    int initial_points = 64;
    int max_points_1d = 1 << 15;
    int max_points_2d = 1 << 11;
    double tolerance = 1e-11;  // absolute change of every log-likelihood between grid doublings
};

inline void check_oracle_preconditions(const Scenario& scn) {
    if (scn.antennas > kOracleMaxAntennas) {
        throw std::invalid_argument("oracle: at most " + std::to_string(kOracleMaxAntennas) + " antennas supported, got " +
                                    std::to_string(scn.antennas));
    }
    if (!(scn.rho <= kOracleMaxRho)) {
        throw std::invalid_argument("oracle: rho must not exceed " + std::to_string(kOracleMaxRho) + " (linear), got " +
                                    std::to_string(scn.rho));
    }
    if (scn.slots != 1) throw std::invalid_argument("oracle: two-slot scenarios only");
}

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
    const double top = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double e : v) sum += std::exp(e - top);
    return top + std::log(sum);
}

inline double log_phase_pdf(const PhaseNoiseModel& model, double phi) {
    if (auto* vm = std::get_if<VonMises>(&model.sampler()); vm != nullptr && model.increments() == 1) {
        return vm->kappa * std::cos(phi) - log_bessel_i0(vm->kappa) - std::log(2.0 * std::numbers::pi);
    }
    const double p = reference_pdf(model, phi);
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

inline double grid_angle(int i, int n) { return -std::numbers::pi + 2.0 * std::numbers::pi * i / n; }

// ln of (1/2pi) int p(phi) exp(f(phi)) dphi by the periodic trapezoid rule.
template <class F>
double integrate_phi(const PhaseNoiseModel& model, int n, F f) {
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double phi = grid_angle(i, n);
        terms[static_cast<std::size_t>(i)] = log_phase_pdf(model, phi) + f(phi);
    }
    return log_sum_exp(terms) + std::log(2.0 * std::numbers::pi / n);
}

// Same over (theta, phi) with theta uniform.
template <class F>
double integrate_theta_phi(const PhaseNoiseModel& model, int n, F f) {
    std::vector<double> terms(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::vector<double> log_pdf(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) log_pdf[static_cast<std::size_t>(j)] = log_phase_pdf(model, grid_angle(j, n));
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        const double theta = grid_angle(i, n);
        for (int j = 0; j < n; ++j) terms[k++] = log_pdf[static_cast<std::size_t>(j)] + f(theta, grid_angle(j, n));
    }
    const double cell = 2.0 * std::numbers::pi / n;
    return log_sum_exp(terms) + 2.0 * std::log(cell) - std::log(2.0 * std::numbers::pi);
}

// ln p(x_m, y_m | phi, s) for the fading channel with h_m ~ CN(0, 1):
// (x, y) is zero-mean Gaussian with covariance [[1+rho, rho e^{-j phi} s*], [rho e^{j phi} s, 1+rho|s|^2]].
inline double fading_pair_log_density(Complex x, Complex y, Complex s, double rho, double phi) {
    const double s2 = std::norm(s);
    const double det = 1.0 + rho + rho * s2;
    const double cross = std::real(std::polar(1.0, -phi) * std::conj(s) * std::conj(x) * y);
    const double quad = ((1.0 + rho * s2) * std::norm(x) + (1.0 + rho) * std::norm(y) - 2.0 * rho * cross) / det;
    return -std::log(std::numbers::pi * std::numbers::pi * det) - quad;
}

inline double cc_pair_log_density(Complex x, Complex y, Complex s, double amp, double theta, double phi) {
    return -2.0 * std::log(std::numbers::pi) - std::norm(x - amp * std::polar(1.0, theta)) -
           std::norm(y - amp * std::polar(1.0, theta + phi) * s);
}

inline double oracle_symbol(const Scenario& scn, const ReceivedSignals& rx, Complex s, int n) {
    const auto& x = rx.pilot;
    const auto& y = rx.data[0];
    const double root = std::sqrt(scn.rho);
    const bool sync = scn.oscillators == Oscillators::Synchronous;
    double total = 0.0;
    if (scn.channel == ChannelKind::Constant) {
        if (sync) {
            total = integrate_theta_phi(scn.noise_model(0), n, [&](double theta, double phi) {
                double e = 0.0;
                for (int m = 0; m < scn.antennas; ++m) {
                    const auto mu = static_cast<std::size_t>(m);
                    e += cc_pair_log_density(x[mu], y[mu], s, root * scn.gain(m), theta, phi);
                }
                return e;
            });
        } else {
            for (int m = 0; m < scn.antennas; ++m) {
                const auto mu = static_cast<std::size_t>(m);
                total += integrate_theta_phi(scn.noise_model(m), n, [&](double theta, double phi) {
                    return cc_pair_log_density(x[mu], y[mu], s, root * scn.gain(m), theta, phi);
                });
            }
        }
    } else {
        if (sync) {
            total = integrate_phi(scn.noise_model(0), n, [&](double phi) {
                double e = 0.0;
                for (std::size_t m = 0; m < x.size(); ++m) e += fading_pair_log_density(x[m], y[m], s, scn.rho, phi);
                return e;
            });
        } else {
            for (int m = 0; m < scn.antennas; ++m) {
                const auto mu = static_cast<std::size_t>(m);
                total += integrate_phi(scn.noise_model(m), n, [&](double phi) {
                    return fading_pair_log_density(x[mu], y[mu], s, scn.rho, phi);
                });
            }
        }
    }
    return total;
}

}  // namespace detail

/// ln p(x, y | s) for every constellation point, refined by doubling the grid
/// until no value moves by more than options.tolerance.
inline OracleResult oracle_log_likelihoods(const Scenario& scn, const ReceivedSignals& rx, const OracleOptions& options = {}) {
    scn.validate();
    check_oracle_preconditions(scn);
    if (rx.pilot.size() != static_cast<std::size_t>(scn.antennas) || rx.data.size() != 1 ||
        rx.data[0].size() != static_cast<std::size_t>(scn.antennas)) {
        throw std::invalid_argument("oracle: observation does not match scenario");
    }
    const int cap = scn.channel == ChannelKind::Constant ? options.max_points_2d : options.max_points_1d;
    auto evaluate = [&](int n) {
        std::vector<double> out(scn.constellation.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::oracle_symbol(scn, rx, scn.constellation[i], n);
        return out;
    };
    OracleResult result;
    int n = options.initial_points;
    auto current = evaluate(n);
    for (;;) {
        const int next_n = 2 * n;
        if (next_n > cap) {
            result.converged = false;
            break;
        }
        auto next = evaluate(next_n);
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - current[i]));
        current = std::move(next);
        n = next_n;
        if (change < options.tolerance) break;
    }
    result.log_likelihood = std::move(current);
    result.grid_points = n;
    return result;
}

}  // namespace pnd

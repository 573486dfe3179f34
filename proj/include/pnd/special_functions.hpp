#pragma once

// Modified Bessel functions of the first kind for nonnegative integer order,
// evaluated in the log domain so that detector arguments in the 1e4..1e8
// range never overflow.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnd {

inline constexpr int kBesselOrderCap = 256;

struct BesselEval {
    int order = 0;
    double argument = 0.0;
    double log_value = 0.0;  // -inf for order >= 1 at argument 0
};

namespace detail {

// Below this argument the power series is used for I_0/I_1, above it the
// Hankel expansion of the exponentially scaled function.
inline constexpr double kHankelThreshold = 50.0;

// ln I_nu(x) by the ascending series; all terms positive.
inline double log_bessel_power_series(int nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum);
}

// ln(e^{-x} I_nu(x)) from the large-argument expansion, valid for x >> nu^2.
inline double log_scaled_bessel_hankel(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * x);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::log(sum) - 0.5 * std::log(2.0 * std::numbers::pi * x);
}

inline double log_scaled_bessel_low_order(int nu, double x) {
    if (x < kHankelThreshold) return log_bessel_power_series(nu, x) - x;
    return log_scaled_bessel_hankel(nu, x);
}

}  // namespace detail

/// ln(e^{-x} I_0(x)) for x >= 0.
inline double log_scaled_bessel_i0(double x) {
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("log_scaled_bessel_i0: negative argument");
    if (x == 0.0) return 0.0;
    return detail::log_scaled_bessel_low_order(0, x);
}

/// ln I_0(x) for x >= 0.
inline double log_bessel_i0(double x) { return log_scaled_bessel_i0(x) + x; }

/// Fills out[k-1] = I_k(x)/I_{k-1}(x) for k = 1..out.size().
///
/// For x >> order^2 the ratios are produced by forward recurrence from
/// I_1/I_0, where the recurrence is well conditioned. Everywhere else a
/// Miller-style backward recurrence of the ratios is started far enough
/// above the requested order that the starting error is damped below
/// double precision.
inline void bessel_ratio_sequence(double x, std::span<double> out) {
    if (out.empty()) return;
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("bessel_ratio_sequence: negative argument");
    if (x == 0.0) {
        for (double& r : out) r = 0.0;
        return;
    }
    const auto n = static_cast<double>(out.size());
    if (x >= detail::kHankelThreshold && n * n <= x) {
        double r = std::exp(detail::log_scaled_bessel_hankel(1, x) - detail::log_scaled_bessel_hankel(0, x));
        out[0] = r;
        for (std::size_t k = 1; k < out.size(); ++k) {
            r = 1.0 / r - 2.0 * static_cast<double>(k) / x;
            out[k] = r;
        }
        return;
    }
    const std::size_t start = out.size() + 20 + static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(x)));
    const double nu = static_cast<double>(start) + 1.0;
    double r = x / (nu + std::sqrt(nu * nu + x * x));
    for (std::size_t k = start; k >= 1; --k) {
        r = 1.0 / (2.0 * static_cast<double>(k) / x + r);
        if (k <= out.size()) out[k - 1] = r;
    }
}

/// ln Γ(z) for z > 0.
inline double log_gamma(double z) {
    if (!(z > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
    return std::lgamma(z);
}

/// I_l(x)/I_{l-1}(x) for l >= 1, x > 0.
///
/// The result is checked against the two-sided ratio bound
/// I_{l-1}/I_l > max{1, (x/2)^{-1} Γ(l+1/2)/Γ(l-1/2)}; a violation means the
/// recurrence lost accuracy and is reported as std::logic_error.
inline double bessel_ratio(int l, double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_ratio: argument must be positive");
    if (l < 1) throw std::domain_error("bessel_ratio: order must be >= 1");
    if (l > kBesselOrderCap) throw std::length_error("bessel_ratio: order above cap " + std::to_string(kBesselOrderCap));
    std::vector<double> ratios(static_cast<std::size_t>(l));
    bessel_ratio_sequence(x, ratios);
    const double r = ratios.back();
    const double gamma_quotient = std::exp(log_gamma(l + 0.5) - log_gamma(l - 0.5));
    const double bound = std::min(1.0, 0.5 * x / gamma_quotient);
    if (!(r > 0.0) || r > bound * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
        throw std::logic_error("bessel_ratio: result violates the ratio bound");
    }
    return r;
}

/// ln(e^{-x} I_l(x)).
inline double log_scaled_bessel_i(int l, double x) {
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("log_bessel_i: negative argument");
    if (l < 0) throw std::domain_error("log_bessel_i: negative order");
    if (l > kBesselOrderCap) throw std::length_error("log_bessel_i: order above cap " + std::to_string(kBesselOrderCap));
    if (x == 0.0) return l == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double value = log_scaled_bessel_i0(x);
    if (l == 0) return value;
    std::vector<double> ratios(static_cast<std::size_t>(l));
    bessel_ratio_sequence(x, ratios);
    for (double r : ratios) value += std::log(r);
    return value;
}

/// ln I_l(x); computed as the scaled value plus x so that x up to 1e8 is safe.
inline double log_bessel_i(int l, double x) {
    const double scaled = log_scaled_bessel_i(l, x);
    return std::isinf(scaled) ? scaled : scaled + x;
}

inline BesselEval evaluate_bessel(int l, double x) { return {l, x, log_bessel_i(l, x)}; }

/// ln I_0(x) together with the cumulative ratios I_l(x)/I_0(x), l = 0..order.
/// This is what every series detector consumes.
struct BesselProfile {
    double log_i0 = 0.0;
    std::vector<double> relative;  // relative[l] = I_l(x)/I_0(x)

    BesselProfile() = default;
    BesselProfile(double x, int order) { assign(x, order); }

    void assign(double x, int order) {
        log_i0 = log_bessel_i0(x);
        relative.resize(static_cast<std::size_t>(order) + 1);
        relative[0] = 1.0;
        if (order == 0) return;
        bessel_ratio_sequence(x, std::span<double>(relative).subspan(1));
        for (std::size_t l = 1; l < relative.size(); ++l) relative[l] *= relative[l - 1];
    }
};

}  // namespace pnd

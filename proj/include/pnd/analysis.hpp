#pragma once

// High-SNR quantities for N-PSK: the synchronous SER floor and the pairwise
// error bounds of the non-synchronous receivers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pnd/phase_noise.hpp"
#include "pnd/special_functions.hpp"

namespace pnd {

struct FloorReport {
    int N = 0;
    PhaseNoiseModel model;
    double floor = 0.0;       // Fourier-series value
    int terms_used = 0;
    double quadrature = 0.0;  // 1 - integral of the pdf over the decision sector
};

inline constexpr double kFloorAccuracy = 1e-14;

namespace detail {

/// Phase pdf used for the floor cross-check: closed forms where the family is
/// known, the Fourier series otherwise.
inline double reference_pdf(const PhaseNoiseModel& model, double phi) {
    const int t = model.increments();
    if (auto* vm = std::get_if<VonMises>(&model.sampler()); vm != nullptr && t == 1) {
        return std::exp(vm->kappa * std::cos(phi) - log_bessel_i0(vm->kappa)) / (2.0 * std::numbers::pi);
    }
    if (auto* wg = std::get_if<WrappedGaussian>(&model.sampler()); wg != nullptr && wg->variance > 0.0) {
        const double var = wg->variance * t;
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
        double sum = 0.0;
        const int reach = 1 + static_cast<int>(std::ceil(8.0 * std::sqrt(var) / (2.0 * std::numbers::pi)));
        for (int k = -reach; k <= reach; ++k) {
            const double u = phi + 2.0 * std::numbers::pi * k;
            sum += std::exp(-0.5 * u * u / var);
        }
        return norm * sum;
    }
    if (model.is_uniform()) return 1.0 / (2.0 * std::numbers::pi);
    return pdf_eval(model, phi);
}

inline bool is_point_mass(const PhaseNoiseModel& model) {
    const auto* wg = std::get_if<WrappedGaussian>(&model.sampler());
    return wg != nullptr && wg->variance == 0.0;
}

inline void check_psk_pair(int N, int n) {
    if (N < 2) throw std::invalid_argument("PSK order must be >= 2");
    if (n < 1 || n >= N) throw std::domain_error("pairwise bound: n must lie in 1..N-1");
}

}  // namespace detail

/// 1 - integral_{-pi/N}^{pi/N} p(phi) dphi by adaptive Gauss-Kronrod.
inline double ser_floor_quadrature(const PhaseNoiseModel& model, int N) {
    if (N < 2) throw std::invalid_argument("ser_floor: PSK order must be >= 2");
    if (detail::is_point_mass(model)) return 0.0;
    const double half = std::numbers::pi / N;
    auto pdf = [&](double phi) { return detail::reference_pdf(model, phi); };
    const double inside = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(pdf, -half, half, 10, 1e-12);
    return 1.0 - inside;
}

/// Symbol error floor of synchronous detection of N-PSK at infinite SNR:
/// 1 - alpha_0/N - sum_l 2 alpha_l sin(l pi / N) / (pi l).
inline FloorReport ser_floor_sync(const PhaseNoiseModel& model, int N) {
    if (N < 2) throw std::invalid_argument("ser_floor: PSK order must be >= 2");
    if (detail::is_point_mass(model)) return {N, model, 0.0, 0, 0.0};
    const auto& a = model.coefficients();
    double floor = 1.0 - a[0] / N;
    int used = 0;
    for (std::size_t l = 1; l < a.size(); ++l) {
        const double ld = static_cast<double>(l);
        const double weight = 2.0 * a[l] / (std::numbers::pi * ld);
        used = static_cast<int>(l);
        if (std::abs(weight) <= kFloorAccuracy * std::abs(floor)) break;
        floor -= weight * std::sin(ld * std::numbers::pi / N);
    }
    return {N, model, std::clamp(floor, 0.0, 1.0 - 1.0 / N), used, ser_floor_quadrature(model, N)};
}

/// Var(X_{m,n}) of the centred per-antenna term of the high-SNR NS metric.
inline double bernstein_variance(double kappa, int N, int n) {
    const double s = std::sin(std::numbers::pi * n / N);
    const double s2 = s * s;
    const double r = bessel_ratio(1, kappa);
    return s2 * (r * std::cos(2.0 * std::numbers::pi * n / N) / kappa + s2 * (1.0 - r * r));
}

/// Bernstein bound on Pr{s_n beats s_0} for the high-SNR NS rule with M
/// antennas and von Mises(kappa) increments.
inline double bernstein_pairwise_bound(double kappa, int N, int n, int M) {
    if (!(kappa > 0.0)) throw std::domain_error("bernstein bound: kappa must be positive");
    if (M < 1) throw std::invalid_argument("bernstein bound: M must be >= 1");
    detail::check_psk_pair(N, n);
    const double s = std::sin(std::numbers::pi * n / N);
    const double s2 = s * s;
    const double r = bessel_ratio(1, kappa);
    const double var = bernstein_variance(kappa, N, n);
    if (!(var > 0.0)) throw std::logic_error("bernstein bound: non-positive variance");
    const double c = s + s2 * r;
    const double ratio = s2 * r / std::sqrt(var);
    const double exponent = static_cast<double>(M) * ratio * ratio / (2.0 + (2.0 / 3.0) * c * s2 * r / var);
    return std::exp(-exponent);
}

/// Chebyshev bound Var(xi_n) / E[xi_n]^2 on Pr{s_n beats s_0} for the
/// minimum-distance FC-NS rule with M antennas and von Mises(kappa) increments.
inline double chebyshev_pairwise_bound_fc_ns(double kappa, int N, int n, int M) {
    if (!(kappa > 0.0)) throw std::domain_error("chebyshev bound: kappa must be positive");
    if (M < 1) throw std::invalid_argument("chebyshev bound: M must be >= 1");
    if (N < 2) throw std::invalid_argument("PSK order must be >= 2");
    if (n % N == 0) throw std::domain_error("chebyshev bound: n = 0 gives a zero mean gap");
    if (n < 1 || n >= N) throw std::domain_error("chebyshev bound: n must lie in 1..N-1");
    const double c = std::cos(2.0 * std::numbers::pi * n / N);
    const double sn = std::sin(2.0 * std::numbers::pi * n / N);
    const double r1 = bessel_ratio(1, kappa);
    const double r2 = r1 * bessel_ratio(2, kappa);
    const double gap = 1.0 - c;
    const double unit_var = gap * gap * (1.0 + r2 - r1 * r1) + sn * sn * (1.0 - r2);
    const double mean = gap * r1;
    return (unit_var / static_cast<double>(M)) / (mean * mean);
}

/// min(1, sum of pairwise probabilities).
inline double union_bound(std::span<const double> pairwise) {
    double sum = 0.0;
    for (double p : pairwise) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("union_bound: entries must lie in [0, 1]");
        sum += p;
    }
    return std::min(1.0, sum);
}

inline double bernstein_union_bound(double kappa, int N, int M) {
    double sum = 0.0;
    for (int n = 1; n < N; ++n) sum += bernstein_pairwise_bound(kappa, N, n, M);
    return std::min(1.0, sum);
}

inline double chebyshev_union_bound(double kappa, int N, int M) {
    double sum = 0.0;
    for (int n = 1; n < N; ++n) sum += std::min(1.0, chebyshev_pairwise_bound_fc_ns(kappa, N, n, M));
    return std::min(1.0, sum);
}

}  // namespace pnd

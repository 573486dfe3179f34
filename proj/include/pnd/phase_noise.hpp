#pragma once

// Circular phase-noise increments described by the cosine Fourier
// coefficients of their pdf,
//   p(phi) = (1/2pi) (alpha_0 + 2 sum_l alpha_l cos(l phi)),
// with alpha_l = E[cos(l Phi)]. Only zero-mean symmetric pdfs are
// representable, so there are no sine terms.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pnd/special_functions.hpp"

namespace pnd {

inline constexpr int kDefaultFourierOrder = 64;

struct VonMises {
    double kappa = 0.0;
};
struct WrappedGaussian {
    double variance = 0.0;
};
struct UniformPhase {};

/// How to draw one increment. std::monostate means the model was given only
/// by its coefficients and cannot be sampled.
using PhaseSampler = std::variant<std::monostate, VonMises, WrappedGaussian, UniformPhase>;

/// Wraps an angle into [-pi, pi).
inline double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = phi - two_pi * std::floor((phi + std::numbers::pi) / two_pi);
    if (w >= std::numbers::pi) w -= two_pi;
    if (w < -std::numbers::pi) w = -std::numbers::pi;
    return w;
}

class PhaseNoiseModel {
public:
    /// Coefficients alpha_0..alpha_L of a single increment. alpha_0 must be 1
    /// and every |alpha_l| <= 1.
    static PhaseNoiseModel from_coefficients(std::vector<double> coeffs, PhaseSampler sampler = {}) {
        if (coeffs.empty()) throw std::invalid_argument("phase noise model needs at least alpha_0");
        if (std::abs(coeffs[0] - 1.0) > 1e-12) throw std::invalid_argument("phase noise model: alpha_0 must be 1");
        for (double a : coeffs) {
            if (!std::isfinite(a) || std::abs(a) > 1.0 + 1e-12) {
                throw std::invalid_argument("phase noise model: |alpha_l| must not exceed 1");
            }
        }
        coeffs[0] = 1.0;
        PhaseNoiseModel m;
        m.base_ = std::move(coeffs);
        m.coeffs_ = m.base_;
        m.sampler_ = sampler;
        return m;
    }

    const std::vector<double>& coefficients() const { return coeffs_; }
    double coefficient(std::size_t l) const { return l < coeffs_.size() ? coeffs_[l] : 0.0; }
    /// Highest represented harmonic L.
    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    const PhaseSampler& sampler() const { return sampler_; }
    /// Number of i.i.d. base increments summed (1 unless produced by convolve_iid).
    int increments() const { return increments_; }

    bool is_uniform() const { return std::holds_alternative<UniformPhase>(sampler_); }

    std::string family() const {
        if (std::holds_alternative<VonMises>(sampler_)) return "von_mises";
        if (std::holds_alternative<WrappedGaussian>(sampler_)) return "wrapped_gaussian";
        if (std::holds_alternative<UniformPhase>(sampler_)) return "uniform";
        return "fourier";
    }

    /// The family parameter of one base increment (kappa or sigma^2); 0 otherwise.
    double parameter() const {
        if (auto* vm = std::get_if<VonMises>(&sampler_)) return vm->kappa;
        if (auto* wg = std::get_if<WrappedGaussian>(&sampler_)) return wg->variance;
        return 0.0;
    }

    /// Model of the sum of t i.i.d. copies of this model's increment.
    PhaseNoiseModel convolved(int t) const {
        if (t < 1) throw std::invalid_argument("convolve_iid: t must be >= 1");
        PhaseNoiseModel m = *this;
        m.increments_ = increments_ * t;
        for (std::size_t l = 0; l < base_.size(); ++l) m.coeffs_[l] = std::pow(base_[l], m.increments_);
        m.coeffs_[0] = 1.0;
        return m;
    }

private:
    PhaseNoiseModel() = default;

    std::vector<double> base_;
    std::vector<double> coeffs_;
    PhaseSampler sampler_;
    int increments_ = 1;
};

/// alpha_l = I_l(kappa)/I_0(kappa).
inline PhaseNoiseModel fourier_von_mises(double kappa, int order = kDefaultFourierOrder) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::domain_error("von Mises: kappa must be >= 0");
    if (order < 1) throw std::invalid_argument("von Mises: order must be >= 1");
    BesselProfile profile(kappa, order);
    return PhaseNoiseModel::from_coefficients(std::move(profile.relative), VonMises{kappa});
}

/// alpha_l = exp(-variance * l^2 / 2).
inline PhaseNoiseModel fourier_wrapped_gaussian(double variance, int order = kDefaultFourierOrder) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw std::domain_error("wrapped Gaussian: variance must be >= 0");
    if (order < 1) throw std::invalid_argument("wrapped Gaussian: order must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(order) + 1);
    for (std::size_t l = 0; l < c.size(); ++l) {
        const double ld = static_cast<double>(l);
        c[l] = std::exp(-0.5 * variance * ld * ld);
    }
    return PhaseNoiseModel::from_coefficients(std::move(c), WrappedGaussian{variance});
}

inline PhaseNoiseModel uniform_phase_noise(int order = kDefaultFourierOrder) {
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    c[0] = 1.0;
    return PhaseNoiseModel::from_coefficients(std::move(c), UniformPhase{});
}

/// alpha_l(t) = alpha_l^t.
inline PhaseNoiseModel convolve_iid(const PhaseNoiseModel& model, int t) { return model.convolved(t); }

inline constexpr double kPdfNegativityTolerance = 1e-9;

/// Truncated Fourier pdf at phi in [-pi, pi]. Dips below zero smaller than
/// kPdfNegativityTolerance are clamped; larger dips mean the coefficient set
/// is not a valid density at this truncation.
inline double pdf_eval(const PhaseNoiseModel& model, double phi) {
    if (!(phi >= -std::numbers::pi && phi <= std::numbers::pi)) {
        throw std::domain_error("pdf_eval: angle outside [-pi, pi]");
    }
    const auto& a = model.coefficients();
    double sum = 0.0;
    // Accumulate from the highest harmonic down; the tail terms are smallest.
    for (std::size_t l = a.size() - 1; l >= 1; --l) sum += a[l] * std::cos(static_cast<double>(l) * phi);
    const double value = (a[0] + 2.0 * sum) / (2.0 * std::numbers::pi);
    if (value < -kPdfNegativityTolerance) throw std::runtime_error("pdf_eval: truncated series is not a valid density");
    return value < 0.0 ? 0.0 : value;
}

namespace detail {

template <class Rng>
double sample_von_mises(double kappa, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (kappa < 1e-8) return wrap_phase(std::numbers::pi * (2.0 * unit(rng) - 1.0));
    if (kappa > 1e6) {
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(kappa));
        return wrap_phase(normal(rng));
    }
    // Best & Fisher rejection sampler.
    const double s = 0.5 / kappa;
    const double r = s + std::sqrt(1.0 + s * s);
    double w = 0.0;
    for (;;) {
        const double z = std::cos(std::numbers::pi * unit(rng));
        w = (1.0 + r * z) / (r + z);
        const double y = kappa * (r - w);
        const double v = unit(rng);
        if (y * (2.0 - y) - v >= 0.0) break;
        if (v > 0.0 && std::log(y / v) + 1.0 - y >= 0.0) break;
    }
    const double angle = std::acos(std::clamp(w, -1.0, 1.0));
    return unit(rng) < 0.5 ? wrap_phase(-angle) : wrap_phase(angle);
}

template <class Rng>
double sample_increment(const PhaseSampler& sampler, Rng& rng) {
    if (auto* vm = std::get_if<VonMises>(&sampler)) return sample_von_mises(vm->kappa, rng);
    if (auto* wg = std::get_if<WrappedGaussian>(&sampler)) {
        if (wg->variance == 0.0) return 0.0;
        std::normal_distribution<double> normal(0.0, std::sqrt(wg->variance));
        return wrap_phase(normal(rng));
    }
    if (std::holds_alternative<UniformPhase>(sampler)) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        return wrap_phase(std::numbers::pi * (2.0 * unit(rng) - 1.0));
    }
    throw std::invalid_argument("sample_phase: model has no sampler");
}

}  // namespace detail

/// One draw of the model's phase (the sum of increments() base increments),
/// wrapped into [-pi, pi).
template <class Rng>
double sample_phase(const PhaseNoiseModel& model, Rng& rng) {
    double phi = 0.0;
    for (int i = 0; i < model.increments(); ++i) phi += detail::sample_increment(model.sampler(), rng);
    return wrap_phase(phi);
}

}  // namespace pnd

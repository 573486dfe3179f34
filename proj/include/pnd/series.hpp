#pragma once

// Truncated Jacobi-Anger sums. Every likelihood in this library has the form
//   L(nu) = B + sum_k ln(beta_{k,0} + 2 sum_{l=1}^{nu} beta_{k,l} cos(l zeta_k)),
// one series per antenna (NS) or a single series (S). All series of one
// metric share the truncation index nu, which grows until the metric itself
// stops moving. Each series keeps its leading term factored out, so Bessel
// products never overflow.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace pnd {

struct TruncationPolicy {
    double accuracy = 1e-12;  // relative change of the truncated metric that ends summation
    int min_terms = 2;
    int max_terms = 64;

    void validate() const {
        if (!(accuracy > 0.0 && accuracy < 1.0)) throw std::invalid_argument("truncation accuracy must lie in (0, 1)");
        if (min_terms < 1 || min_terms > max_terms) throw std::invalid_argument("truncation requires 1 <= min_terms <= max_terms");
    }
};

struct SeriesValue {
    double log_value = 0.0;
    int terms_used = 0;
    bool converged = true;
    bool clamped = false;  // a truncated sum stayed <= 0 and was clamped

    bool flagged() const { return !converged || clamped; }
};

/// A real number stored as ln|v| and its sign (0 for v == 0).
struct SignedLog {
    double log_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;
};

inline constexpr double kClampFactor = 1e-300;

/// One cosine series: exp(log_scale) * (c_0 + 2 sum c_l cos(l zeta)).
/// Coefficients past the end of `normalized` are zero.
struct CosineSeries {
    double log_scale = 0.0;
    std::span<const double> normalized;
    double zeta = 0.0;
};

namespace detail {

struct SeriesCursor {
    double cos1 = 1.0;
    double cos_prev = 1.0;
    double cos_cur = 1.0;
    double sum = 0.0;
};

}  // namespace detail

/// offset + sum_k ln(series_k truncated at nu). nu is the first index >=
/// min_terms at which the value moves by less than accuracy relative to
/// its previous partial value. If some partial sum is still <= 0 at
/// max_terms it is clamped to c_0 * 1e-300 and the result is flagged.
inline SeriesValue truncated_metric(double offset, std::span<const CosineSeries> series, const TruncationPolicy& policy) {
    std::vector<detail::SeriesCursor> cursors(series.size());
    double prev = offset;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        if (s.normalized.empty() || !(s.normalized[0] > 0.0)) {
            throw std::invalid_argument("series: leading coefficient must be positive");
        }
        auto& c = cursors[k];
        c.cos1 = std::cos(s.zeta);
        c.cos_cur = c.cos1;
        c.sum = s.normalized[0];
        prev += s.log_scale + std::log(c.sum);
    }
    bool prev_valid = true;

    for (int l = 1; l <= policy.max_terms; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        double value = offset;
        bool valid = true;
        for (std::size_t k = 0; k < series.size(); ++k) {
            auto& c = cursors[k];
            if (l > 1) {
                const double next = 2.0 * c.cos1 * c.cos_cur - c.cos_prev;
                c.cos_prev = c.cos_cur;
                c.cos_cur = next;
            }
            const auto& coeffs = series[k].normalized;
            if (lu < coeffs.size()) c.sum += 2.0 * coeffs[lu] * c.cos_cur;
            if (c.sum > 0.0) {
                value += series[k].log_scale + std::log(c.sum);
            } else {
                valid = false;
            }
        }
        if (valid) {
            const double change = std::abs(value - prev);
            if (l >= policy.min_terms && prev_valid && (change == 0.0 || change < policy.accuracy * std::abs(prev))) {
                return {value, l, true, false};
            }
            prev = value;
        }
        prev_valid = valid;
    }

    SeriesValue out{offset, policy.max_terms, false, false};
    for (std::size_t k = 0; k < series.size(); ++k) {
        double sum = cursors[k].sum;
        if (!(sum > 0.0)) {
            sum = series[k].normalized[0] * kClampFactor;
            out.clamped = true;
        }
        out.log_value += series[k].log_scale + std::log(sum);
    }
    return out;
}

/// log_scale + ln(c_0 + 2 sum_{l=1}^{nu} c_l cos(l zeta)) for a single series.
inline SeriesValue truncated_cosine_series(double log_scale, std::span<const double> normalized, double zeta,
                                           const TruncationPolicy& policy) {
    const CosineSeries one{log_scale, normalized, zeta};
    return truncated_metric(0.0, std::span<const CosineSeries>(&one, 1), policy);
}

/// ln(beta_0 + 2 sum beta_l cos(l zeta)) for coefficients given in signed-log
/// form. The largest retained coefficient is factored out before summing.
inline SeriesValue log_truncated_series(std::span<const SignedLog> coeffs, double zeta, const TruncationPolicy& policy) {
    if (coeffs.empty() || coeffs[0].sign <= 0) throw std::invalid_argument("series: beta_0 must be positive");
    const std::size_t n = std::min(coeffs.size(), static_cast<std::size_t>(policy.max_terms) + 1);
    double scale = coeffs[0].log_abs;
    for (std::size_t l = 1; l < n; ++l) {
        if (coeffs[l].sign != 0) scale = std::max(scale, coeffs[l].log_abs);
    }
    std::vector<double> normalized(n);
    for (std::size_t l = 0; l < n; ++l) {
        normalized[l] = coeffs[l].sign == 0 ? 0.0 : coeffs[l].sign * std::exp(coeffs[l].log_abs - scale);
    }
    return truncated_cosine_series(scale, normalized, zeta, policy);
}

}  // namespace pnd

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pnd {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Zero-mean, unit-average-energy symbol alphabet. N-PSK alphabets
/// s_n = exp(j 2 pi n / N) are recognised so that PSK-only rules can reject
/// anything else.
class Constellation {
public:
    static Constellation psk(int order) {
        if (order < 2) throw std::invalid_argument("PSK order must be >= 2");
        ComplexVector pts(static_cast<std::size_t>(order));
        for (int n = 0; n < order; ++n) pts[static_cast<std::size_t>(n)] = psk_point(n, order);
        Constellation c;
        c.points_ = std::move(pts);
        c.psk_order_ = order;
        return c;
    }

    static Constellation from_points(ComplexVector pts) {
        if (pts.size() < 2) throw std::invalid_argument("constellation needs at least two points");
        Complex mean{0.0, 0.0};
        double energy = 0.0;
        for (const auto& p : pts) {
            mean += p;
            energy += std::norm(p);
        }
        const auto n = static_cast<double>(pts.size());
        if (std::abs(mean / n) > 1e-12) throw std::invalid_argument("constellation must be zero mean");
        if (std::abs(energy / n - 1.0) > 1e-12) throw std::invalid_argument("constellation must have unit average energy");
        Constellation c;
        c.psk_order_ = detect_psk(pts);
        c.points_ = std::move(pts);
        return c;
    }

    std::size_t size() const { return points_.size(); }
    const Complex& operator[](std::size_t i) const { return points_[i]; }
    const ComplexVector& points() const { return points_; }
    bool is_psk() const { return psk_order_ > 0; }
    int psk_order() const { return psk_order_; }

    static Complex psk_point(int n, int order) {
        return std::polar(1.0, 2.0 * std::numbers::pi * n / order);
    }

private:
    static int detect_psk(const ComplexVector& pts) {
        const int order = static_cast<int>(pts.size());
        for (int n = 0; n < order; ++n) {
            if (std::abs(pts[static_cast<std::size_t>(n)] - psk_point(n, order)) > 1e-12) return 0;
        }
        return order;
    }

    ComplexVector points_;
    int psk_order_ = 0;
};

}  // namespace pnd

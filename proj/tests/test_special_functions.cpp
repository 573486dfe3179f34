#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "pnd/special_functions.hpp"

using namespace pnd;

namespace {

// ln I_l(x) from the ascending series sum_k (x/2)^{2k+l} / (k! (k+l)!) in
// long double. Terms are kept relative to the largest one.
long double series_log_bessel(int l, long double x) {
    const long double h = x / 2;
    long double log_term = l * std::log(h) - std::lgamma(static_cast<long double>(l) + 1);
    std::vector<long double> logs;
    for (int k = 0; k < 4000; ++k) {
        logs.push_back(log_term);
        log_term += 2 * std::log(h) - std::log(static_cast<long double>(k + 1)) - std::log(static_cast<long double>(k + 1 + l));
        if (k > x && log_term < logs.front() - 80 && log_term < *std::max_element(logs.begin(), logs.end()) - 80) break;
    }
    const long double top = *std::max_element(logs.begin(), logs.end());
    long double sum = 0;
    for (auto v : logs) sum += std::exp(v - top);
    return top + std::log(sum);
}

}  // namespace

TEST(LogBessel, ZeroArgument) {
    EXPECT_EQ(log_bessel_i(0, 0.0), 0.0);
    EXPECT_EQ(log_bessel_i(1, 0.0), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(log_bessel_i(7, 0.0), -std::numeric_limits<double>::infinity());
}

TEST(LogBessel, OrderZeroAtOneMatchesSeries) {
    EXPECT_NEAR(log_bessel_i(0, 1.0), static_cast<double>(series_log_bessel(0, 1.0L)), 1e-15);
}

TEST(LogBessel, MatchesPowerSeriesOnGrid) {
    for (double x : {1e-6, 1e-3, 0.5, 1.0, 2.0, 5.0, 12.0, 30.0, 49.9, 50.0, 50.1, 75.0, 120.0, 300.0, 700.0}) {
        for (int l : {0, 1, 2, 3, 5, 8, 13, 20, 40, 64}) {
            const double expected = static_cast<double>(series_log_bessel(l, static_cast<long double>(x)));
            const double got = log_bessel_i(l, x);
            // Relative error 1e-12 on the value is an absolute 1e-12 on the log.
            EXPECT_NEAR(got, expected, 1e-12) << "l=" << l << " x=" << x;
        }
    }
}

TEST(LogBessel, LargeArgumentsStayFinite) {
    for (double x : {1e3, 1e5, 1e8}) {
        for (int l : {0, 1, 10, 256}) {
            const double v = log_bessel_i(l, x);
            EXPECT_TRUE(std::isfinite(v));
            // I_l(x) ~ e^x / sqrt(2 pi x) for x >> l^2.
            EXPECT_LT(v, x);
        }
    }
    EXPECT_NEAR(log_scaled_bessel_i(0, 1e8), -0.5 * std::log(2.0 * std::numbers::pi * 1e8), 1e-8);
}

TEST(LogBessel, Errors) {
    EXPECT_THROW(log_bessel_i(0, -1.0), std::domain_error);
    EXPECT_THROW(log_bessel_i(-1, 1.0), std::domain_error);
    EXPECT_THROW(log_bessel_i(kBesselOrderCap + 1, 1.0), std::length_error);
    EXPECT_NO_THROW(log_bessel_i(kBesselOrderCap, 1.0));
}

TEST(LogBessel, StrictlyDecreasingInOrder) {
    for (double x : {0.01, 0.7, 4.0, 33.0, 80.0, 1000.0}) {
        double prev = log_bessel_i(0, x);
        for (int l = 1; l <= 100; ++l) {
            const double v = log_bessel_i(l, x);
            EXPECT_LT(v, prev) << "l=" << l << " x=" << x;
            prev = v;
        }
    }
}

TEST(BesselRatio, SmallArgument) {
    const double r = bessel_ratio(1, 1e-8);
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 1e-7);
    EXPECT_NEAR(r, 0.5e-8, 1e-20);
}

TEST(BesselRatio, OrderTwoAtTwoMatchesSeries) {
    const double expected = std::exp(static_cast<double>(series_log_bessel(2, 2.0L) - series_log_bessel(1, 2.0L)));
    EXPECT_NEAR(bessel_ratio(2, 2.0), expected, 1e-15);
}

TEST(BesselRatio, AgreesWithValueDivision) {
    for (double x : {0.3, 1.0, 7.5, 20.0, 50.0}) {
        for (int l = 1; l <= 30; ++l) {
            const double lhs = bessel_ratio(l, x) * std::exp(log_bessel_i(l - 1, x));
            const double rhs = std::exp(log_bessel_i(l, x));
            EXPECT_NEAR(lhs / rhs, 1.0, 1e-10) << "l=" << l << " x=" << x;
        }
    }
}

TEST(BesselRatio, LowerBoundGrid) {
    // I_{l-1}(x)/I_l(x) > max{1, (x/2)^{-1} Gamma(l+1/2)/Gamma(l-1/2)}.
    for (int l = 2; l <= 8; ++l) {
        for (double x : {0.5, 2.0, 8.0}) {
            const double inverse = 1.0 / bessel_ratio(l, x);
            const double bound = std::max(1.0, std::exp(log_gamma(l + 0.5) - log_gamma(l - 0.5)) / (0.5 * x));
            EXPECT_GT(inverse, bound) << "l=" << l << " x=" << x;
        }
    }
}

TEST(BesselRatio, RatioLowerBoundGeneralOrders) {
    for (int nu = 1; nu <= 10; ++nu) {
        for (int mu = nu + 1; mu <= nu + 12; ++mu) {
            for (double x : {0.1, 1.0, 5.0, 20.0, 60.0, 200.0}) {
                const double log_ratio = log_bessel_i(nu, x) - log_bessel_i(mu, x);
                const double log_bound =
                    std::max(0.0, (nu - mu) * std::log(0.5 * x) + log_gamma(mu + 0.5) - log_gamma(nu + 0.5));
                EXPECT_GT(log_ratio, log_bound) << nu << " " << mu << " " << x;
            }
        }
    }
}

TEST(BesselRatio, RelativeToFirstOrderDecreases) {
    for (double x : {0.5, 2.0, 10.0, 40.0}) {
        double prev = 1.0;
        for (int mu = 2; mu <= 40; ++mu) {
            const double r = std::exp(log_bessel_i(mu, x) - log_bessel_i(1, x));
            EXPECT_LT(r, 1.0);
            EXPECT_LT(r, prev);
            prev = r;
        }
    }
}

TEST(BesselRatio, Errors) {
    EXPECT_THROW(bessel_ratio(1, 0.0), std::domain_error);
    EXPECT_THROW(bessel_ratio(1, -2.0), std::domain_error);
    EXPECT_THROW(bessel_ratio(0, 1.0), std::domain_error);
    EXPECT_THROW(bessel_ratio(kBesselOrderCap + 1, 1.0), std::length_error);
}

TEST(LogGamma, KnownValues) {
    EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-15);
    EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-12 * std::log(24.0));
    EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
    EXPECT_THROW(log_gamma(0.0), std::domain_error);
    EXPECT_THROW(log_gamma(-1.5), std::domain_error);
}

TEST(BesselProfile, CumulativeRatios) {
    const BesselProfile p(13.0, 25);
    EXPECT_DOUBLE_EQ(p.log_i0, log_bessel_i0(13.0));
    ASSERT_EQ(p.relative.size(), 26u);
    for (int l = 0; l <= 25; ++l) {
        EXPECT_NEAR(p.relative[static_cast<std::size_t>(l)], std::exp(log_bessel_i(l, 13.0) - log_bessel_i(0, 13.0)), 1e-13);
    }
    const BesselProfile zero(0.0, 4);
    EXPECT_EQ(zero.relative[0], 1.0);
    EXPECT_EQ(zero.relative[3], 0.0);
}

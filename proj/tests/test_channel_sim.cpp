#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "pnd/channel_sim.hpp"
#include "pnd/rng.hpp"

using namespace pnd;

namespace {

Scenario make(ChannelKind ch, Oscillators os, double rho, int m, PhaseNoiseModel model) {
    Scenario s;
    s.channel = ch;
    s.oscillators = os;
    s.rho = rho;
    s.antennas = m;
    s.noise = {std::move(model)};
    return s;
}

}  // namespace

TEST(Constellation, PskAndValidation) {
    const auto q = Constellation::psk(4);
    ASSERT_EQ(q.size(), 4u);
    EXPECT_TRUE(q.is_psk());
    EXPECT_NEAR(std::abs(q[1] - Complex(0.0, 1.0)), 0.0, 1e-15);
    EXPECT_THROW(Constellation::from_points({{1.0, 0.0}, {1.0, 0.0}}), std::invalid_argument);
    EXPECT_THROW(Constellation::from_points({{2.0, 0.0}, {-2.0, 0.0}}), std::invalid_argument);
    const auto bpsk = Constellation::from_points({{1.0, 0.0}, {-1.0, 0.0}});
    EXPECT_TRUE(bpsk.is_psk());
    const double a = 1.0 / std::sqrt(2.0);
    const auto qam = Constellation::from_points({{a, a}, {-a, a}, {-a, -a}, {a, -a}});
    EXPECT_EQ(qam.size(), 4u);
}

TEST(Scenario, Validation) {
    auto s = make(ChannelKind::Constant, Oscillators::Synchronous, 1.0, 2, fourier_von_mises(4.0));
    EXPECT_NO_THROW(s.validate());
    s.gains = {1.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.gains = {1.0, -1.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.gains.clear();
    s.noise = {fourier_von_mises(4.0), fourier_von_mises(2.0)};
    EXPECT_THROW(s.validate(), std::invalid_argument);  // S needs one oscillator model
    s.oscillators = Oscillators::NonSynchronous;
    EXPECT_NO_THROW(s.validate());
    s.rho = -1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Simulator, InvalidInputs) {
    auto s = make(ChannelKind::Fading, Oscillators::NonSynchronous, 1.0, 2, fourier_von_mises(4.0));
    auto rng = substream(1, 0, StreamRole::Channel);
    EXPECT_THROW(simulate_two_slot(s, 4, rng), std::invalid_argument);
    EXPECT_THROW(simulate_two_slot(s, -1, rng), std::invalid_argument);
    s.slots = 3;
    EXPECT_THROW(simulate_t_slot(s, {0, 1}, rng), std::invalid_argument);
    EXPECT_THROW(simulate_two_slot(s, 0, rng), std::invalid_argument);
}

TEST(Simulator, ZeroSnrIsPureNoise) {
    for (auto ch : {ChannelKind::Constant, ChannelKind::Fading}) {
        const auto s = make(ch, Oscillators::NonSynchronous, 0.0, 4, fourier_von_mises(4.0));
        auto rng = substream(2, 0, StreamRole::Channel);
        constexpr int n = 50000;
        double re2 = 0.0, im2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto obs = simulate_two_slot(s, i % 4, rng);
            for (const auto& v : obs.received.pilot) {
                re2 += v.real() * v.real();
                im2 += v.imag() * v.imag();
            }
            for (const auto& v : obs.received.data[0]) {
                re2 += v.real() * v.real();
                im2 += v.imag() * v.imag();
            }
        }
        const double count = 8.0 * n;
        // Each real component has variance 1/2, so E[x^2] = 1/2 with sd 1/sqrt(2 count).
        const double sd = 1.0 / std::sqrt(2.0 * count);
        EXPECT_NEAR(re2 / count, 0.5, 4.0 * sd);
        EXPECT_NEAR(im2 / count, 0.5, 4.0 * sd);
        EXPECT_NEAR((re2 + im2) / count, 1.0, 4.0 * 2.0 * sd);
    }
}

TEST(Simulator, NoiselessConstantChannelSynchronous) {
    auto s = make(ChannelKind::Constant, Oscillators::Synchronous, 10.0, 3, fourier_wrapped_gaussian(0.0));
    s.gains = {0.5, 1.0, 2.0};
    s.noiseless = true;
    auto rng = substream(3, 0, StreamRole::Channel);
    for (int k = 0; k < 4; ++k) {
        const auto obs = simulate_two_slot(s, k, rng);
        for (std::size_t m = 0; m < 3; ++m) {
            EXPECT_NEAR(std::abs(obs.received.data[0][m] - obs.received.pilot[m] * s.constellation[static_cast<std::size_t>(k)]), 0.0,
                        1e-14);
            EXPECT_NEAR(std::abs(obs.received.pilot[m]), std::sqrt(10.0) * s.gains[m], 1e-14);
        }
    }
}

TEST(Simulator, FadingPilotEnergy) {
    const double rho = 3.0;
    const auto s = make(ChannelKind::Fading, Oscillators::Synchronous, rho, 1, fourier_von_mises(4.0));
    auto rng = substream(4, 0, StreamRole::Channel);
    constexpr int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = std::norm(simulate_two_slot(s, 0, rng).received.pilot[0]);
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, rho + 1.0, 4.0 * sd);
}

TEST(Simulator, SingleSlotMatchesTwoSlot) {
    auto s = make(ChannelKind::Constant, Oscillators::NonSynchronous, 2.0, 3, fourier_von_mises(4.0));
    auto a = substream(5, 17, StreamRole::Channel);
    auto b = substream(5, 17, StreamRole::Channel);
    const auto one = simulate_t_slot(s, {2}, a);
    const auto two = simulate_two_slot(s, 2, b);
    EXPECT_EQ(one.received.pilot, two.received.pilot);
    EXPECT_EQ(one.received.data, two.received.data);
}

TEST(Simulator, Deterministic) {
    auto s = make(ChannelKind::Fading, Oscillators::NonSynchronous, 2.0, 4, fourier_von_mises(4.0));
    s.slots = 5;
    auto a = substream(6, 99, StreamRole::Channel);
    auto b = substream(6, 99, StreamRole::Channel);
    const auto x = simulate_t_slot(s, {0, 1, 2, 3, 0}, a);
    const auto y = simulate_t_slot(s, {0, 1, 2, 3, 0}, b);
    EXPECT_EQ(x.received.pilot, y.received.pilot);
    EXPECT_EQ(x.received.data, y.received.data);
    EXPECT_EQ(x.truth.accumulated, y.truth.accumulated);
    auto c = substream(6, 100, StreamRole::Channel);
    EXPECT_NE(simulate_t_slot(s, {0, 1, 2, 3, 0}, c).received.pilot, x.received.pilot);
}

TEST(Simulator, PointMassKeepsPhase) {
    auto s = make(ChannelKind::Fading, Oscillators::NonSynchronous, 1.0, 2, fourier_wrapped_gaussian(0.0));
    s.slots = 6;
    auto rng = substream(7, 0, StreamRole::Channel);
    const auto obs = simulate_t_slot(s, {0, 1, 2, 3, 2, 1}, rng);
    for (const auto& row : obs.truth.accumulated) {
        for (double p : row) EXPECT_EQ(p, 0.0);
    }
}

TEST(Simulator, AccumulatedPhaseMoment) {
    auto s = make(ChannelKind::Fading, Oscillators::Synchronous, 1.0, 1, fourier_wrapped_gaussian(0.07));
    s.slots = 3;
    auto rng = substream(8, 0, StreamRole::Channel);
    constexpr int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = std::cos(simulate_t_slot(s, {0, 0, 0}, rng).truth.accumulated[2][0]);
        sum += c;
        sum2 += c * c;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, std::exp(-3.0 * 0.035), 4.0 * sd);
}

TEST(Simulator, OscillatorSharing) {
    auto sync = make(ChannelKind::Constant, Oscillators::Synchronous, 1.0, 4, fourier_von_mises(2.0));
    sync.slots = 2;
    auto rng = substream(9, 0, StreamRole::Channel);
    const auto obs = simulate_t_slot(sync, {0, 1}, rng);
    for (const auto& row : obs.truth.increments) {
        for (double p : row) EXPECT_EQ(p, row[0]);
    }
    for (double th : obs.truth.initial_phase) EXPECT_EQ(th, obs.truth.initial_phase[0]);

    auto ns = sync;
    ns.oscillators = Oscillators::NonSynchronous;
    ns.slots = 1;
    constexpr int n = 200000;
    double s01 = 0.0, s0 = 0.0, s1 = 0.0, q0 = 0.0, q1 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto o = simulate_two_slot(ns, 0, rng);
        const double a = o.truth.increments[0][0];
        const double b = o.truth.increments[0][1];
        s01 += a * b;
        s0 += a;
        s1 += b;
        q0 += a * a;
        q1 += b * b;
    }
    const double cov = s01 / n - (s0 / n) * (s1 / n);
    const double corr = cov / std::sqrt((q0 / n - (s0 / n) * (s0 / n)) * (q1 / n - (s1 / n) * (s1 / n)));
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
}

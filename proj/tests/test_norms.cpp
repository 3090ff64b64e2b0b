#include "gn3/error.hpp"
#include "gn3/norms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

using namespace gn3;

namespace {

constexpr double kPi = std::numbers::pi;

Field random_field(const SpaceGrid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    Field u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = d(rng);
    return u;
}

// Smooth random field: a few Neumann modes with random amplitudes.
Field smooth_field(const SpaceGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double a0 = d(rng), a1 = d(rng), a2 = d(rng), a3 = d(rng);
    return g.sample([&](double x) {
        return a0 + a1 * std::cos(kPi * x) + a2 * std::cos(2 * kPi * x) + a3 * std::cos(5 * kPi * x);
    });
}

using Norm = double (*)(const SpaceGrid&, const Field&);
const std::vector<std::pair<const char*, Norm>> kNorms{
    {"H", norm_H}, {"V", norm_V}, {"Vdual", norm_Vdual}, {"W", norm_W}};

}  // namespace

TEST(NormH, Examples) {
    const SpaceGrid g(1.0, 129);
    EXPECT_NEAR(norm_H(g, g.constant(1.0)), 1.0, 1e-14);
    EXPECT_EQ(norm_H(g, g.zeros()), 0.0);
    EXPECT_NEAR(norm_H(g, g.sample([](double x) { return std::cos(kPi * x); })), std::sqrt(0.5), 1e-4);
}

TEST(NormV, Examples) {
    const SpaceGrid g(1.0, 129);
    EXPECT_NEAR(norm_V(g, g.constant(-2.0)), 2.0, 1e-14);
    EXPECT_EQ(norm_V(g, g.zeros()), 0.0);
    EXPECT_NEAR(norm_V(g, g.sample([](double x) { return x; })), std::sqrt(4.0 / 3.0), 1e-4);
}

TEST(NormV, SecondOrderForLinear) {
    double prev = 0.0;
    for (std::size_t n : {33u, 65u, 129u}) {
        const SpaceGrid g(1.0, n);
        const double err = std::abs(norm_V(g, g.sample([](double x) { return x; })) - std::sqrt(4.0 / 3.0));
        if (prev > 0.0) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.2);
        prev = err;
    }
}

TEST(NormVdual, Examples) {
    const SpaceGrid g(1.0, 129);
    EXPECT_NEAR(norm_Vdual(g, g.constant(1.0)), 1.0, 1e-12);
    EXPECT_EQ(norm_Vdual(g, g.zeros()), 0.0);
    const double expect = std::sqrt(0.5 / (1.0 + kPi * kPi));
    EXPECT_NEAR(norm_Vdual(g, g.sample([](double x) { return std::cos(kPi * x); })), expect, 1e-4);
}

TEST(NormW, Examples) {
    const SpaceGrid g(1.0, 257);
    EXPECT_NEAR(norm_W(g, g.constant(0.5)), 0.5, 1e-14);
    EXPECT_EQ(norm_W(g, g.zeros()), 0.0);
    const double p2 = kPi * kPi;
    const double expect = std::sqrt(0.5 + p2 / 2 + p2 * p2 / 2);
    EXPECT_NEAR(norm_W(g, g.sample([](double x) { return std::cos(kPi * x); })), expect, 1e-3 * expect);
}

TEST(NormProperty, Ordering) {
    std::mt19937_64 rng(21);
    const SpaceGrid g(1.0, 65);
    for (int k = 0; k < 200; ++k) {
        const Field u = k % 2 ? random_field(g, rng) : smooth_field(g, rng);
        const double d = norm_Vdual(g, u), h = norm_H(g, u), v = norm_V(g, u), w = norm_W(g, u);
        EXPECT_LE(d, h + 1e-9);
        EXPECT_LE(h, v + 1e-9);
        EXPECT_LE(v, w + 1e-9);
    }
}

TEST(NormProperty, Homogeneity) {
    std::mt19937_64 rng(22);
    const SpaceGrid g(1.0, 33);
    for (int k = 0; k < 50; ++k) {
        const Field u = random_field(g, rng);
        for (double c : {-3.0, 0.5, 1e3}) {
            for (const auto& [name, norm] : kNorms) {
                const double a = norm(g, c * u);
                const double b = std::abs(c) * norm(g, u);
                EXPECT_NEAR(a, b, 1e-12 * b) << name;
            }
        }
    }
}

TEST(NormProperty, Triangle) {
    std::mt19937_64 rng(23);
    const SpaceGrid g(1.0, 33);
    for (int k = 0; k < 100; ++k) {
        const Field u = random_field(g, rng);
        const Field v = smooth_field(g, rng);
        for (const auto& [name, norm] : kNorms)
            EXPECT_LE(norm(g, u + v), norm(g, u) + norm(g, v) + 1e-12) << name;
    }
}

TEST(NormProperty, VEqualsHIffGradientVanishes) {
    const SpaceGrid g(1.0, 17);
    EXPECT_EQ(norm_V(g, g.constant(0.7)), norm_H(g, g.constant(0.7)));
    EXPECT_GT(norm_V(g, g.sample([](double x) { return x; })), norm_H(g, g.sample([](double x) { return x; })));
}

TEST(NormKind, Labels) {
    EXPECT_EQ((NormKind{SpaceNorm::H, TimeAggregation::W1infT}.label()), "W1inf(H)");
    EXPECT_EQ((NormKind{SpaceNorm::V, TimeAggregation::L2T}.label()), "L2(V)");
    EXPECT_EQ((NormKind{SpaceNorm::W, TimeAggregation::LinfT}.label()), "Linf(W)");
    EXPECT_EQ((NormKind{SpaceNorm::Vdual, TimeAggregation::H1T}.label()), "H1(V')");
}

TEST(Bochner, ConstantInTime) {
    const SpaceGrid g(1.0, 33);
    std::mt19937_64 rng(3);
    const Field u = random_field(g, rng);
    const std::vector<Field> levels(6, u);
    EXPECT_EQ(bochner(g, {SpaceNorm::V, TimeAggregation::W1infT}, levels, 0.1), 0.0);
    EXPECT_EQ(bochner(g, {SpaceNorm::H, TimeAggregation::H1T}, levels, 0.1), 0.0);
    EXPECT_DOUBLE_EQ(bochner(g, {SpaceNorm::V, TimeAggregation::LinfT}, levels, 0.1), norm_V(g, u));
    EXPECT_NEAR(bochner(g, {SpaceNorm::H, TimeAggregation::L2T}, levels, 0.1), std::sqrt(0.5) * norm_H(g, u), 1e-14);
}

TEST(Bochner, UnitField) {
    const SpaceGrid g(1.0, 9);
    const std::vector<Field> levels{g.constant(1.0)};
    EXPECT_NEAR(bochner(g, {SpaceNorm::H, TimeAggregation::LinfT}, levels, 0.1), 1.0, 1e-15);
}

TEST(Bochner, UnitTimeSlope) {
    const SpaceGrid g(1.0, 9);
    const double tau = 0.05;
    std::vector<Field> levels;
    for (int m = 0; m <= 20; ++m) levels.push_back(g.constant(m * tau));
    EXPECT_NEAR(bochner(g, {SpaceNorm::H, TimeAggregation::W1infT}, levels, tau), 1.0, 1e-12);
    EXPECT_NEAR(bochner(g, {SpaceNorm::H, TimeAggregation::H1T}, levels, tau), 1.0, 1e-12);
}

TEST(Bochner, TooFewLevels) {
    const SpaceGrid g(1.0, 9);
    const std::vector<Field> one{g.zeros()};
    EXPECT_THROW((void)bochner(g, {SpaceNorm::H, TimeAggregation::W1infT}, one, 0.1), InvalidArgument);
    EXPECT_THROW((void)bochner(g, {SpaceNorm::H, TimeAggregation::LinfT}, {}, 0.1), InvalidArgument);
    EXPECT_THROW((void)bochner(g, {SpaceNorm::H, TimeAggregation::LinfT}, one, 0.0), InvalidArgument);
}

TEST(FitRate, ExactLinear) {
    const double c = 3.0;
    const std::vector<std::pair<double, double>> p{{0.1, 0.1 * c}, {0.01, 0.01 * c}, {0.001, 0.001 * c}};
    const RateFit f = fit_rate(p);
    EXPECT_NEAR(f.slope, 1.0, 1e-12);
    EXPECT_LE(f.residual, 1e-12);
    EXPECT_EQ(f.n_used, 3u);
}

TEST(FitRate, ExactSquareRoot) {
    const double c = 0.7;
    const std::vector<std::pair<double, double>> p{{0.04, 0.2 * c}, {0.01, 0.1 * c}, {0.0025, 0.05 * c}};
    const RateFit f = fit_rate(p);
    EXPECT_NEAR(f.slope, 0.5, 1e-12);
    EXPECT_LE(f.residual, 1e-12);
}

TEST(FitRate, NoisyLinear) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> p;
        for (int k = 4; k <= 10; ++k) {
            const double a = std::ldexp(1.0, -k);
            p.emplace_back(a, 2.0 * a * (1.0 + noise(rng)));
        }
        const double s = fit_rate(p).slope;
        EXPECT_GE(s, 0.9);
        EXPECT_LE(s, 1.1);
    }
}

TEST(FitRate, ExactOnPowerLaws) {
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        std::vector<std::pair<double, double>> p;
        for (int k = 1; k <= 7; ++k) p.emplace_back(std::pow(0.5, k), 5.0 * std::pow(0.5, k * r));
        const RateFit f = fit_rate(p);
        EXPECT_NEAR(f.slope, r, 1e-12);
        EXPECT_LE(f.residual, 1e-12);
    }
}

TEST(FitRate, ZeroErrorsDropped) {
    const std::vector<std::pair<double, double>> p{{0.1, 0.1}, {0.05, 0.0}, {0.01, 0.01}, {0.001, 0.001}};
    const RateFit f = fit_rate(p);
    EXPECT_EQ(f.n_dropped, 1u);
    EXPECT_EQ(f.n_used, 3u);
    EXPECT_NEAR(f.slope, 1.0, 1e-12);
}

TEST(FitRate, Errors) {
    const std::vector<std::pair<double, double>> zeros{{0.1, 0.0}, {0.01, 0.0}, {0.001, 0.0}};
    EXPECT_THROW((void)fit_rate(zeros), DegenerateComparison);
    const std::vector<std::pair<double, double>> two{{0.1, 0.1}, {0.01, 0.01}};
    EXPECT_THROW((void)fit_rate(two), InvalidArgument);
    const std::vector<std::pair<double, double>> negative{{0.1, 0.1}, {0.01, -0.01}, {0.001, 0.001}};
    EXPECT_THROW((void)fit_rate(negative), InvalidArgument);
    const std::vector<std::pair<double, double>> bad_alpha{{0.1, 0.1}, {0.0, 0.01}, {0.001, 0.001}};
    EXPECT_THROW((void)fit_rate(bad_alpha), InvalidArgument);
}

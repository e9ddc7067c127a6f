#include "splicebs/ck_oracle.hpp"
#include "splicebs/coverage_lab.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace splicebs;
using Catch::Approx;

namespace {

double normal_density(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Monte Carlo endpoints of the true k-step law from y_n.
std::vector<PredictionInterval> mc_intervals(const FittedModel& m, const NoiseSpec& noise, double y_n,
                                             int K, std::size_t draws, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(K));
    for (auto& c : cols) c.reserve(draws);
    const double start[] = {y_n};
    for (std::size_t i = 0; i < draws; ++i) {
        const auto path = forecast_path(m, start, K, noise, rng);
        for (int k = 0; k < K; ++k) cols[static_cast<std::size_t>(k)].push_back(path[static_cast<std::size_t>(k)]);
    }
    std::vector<PredictionInterval> out;
    for (int k = 1; k <= K; ++k) out.push_back(percentile_interval(cols[static_cast<std::size_t>(k - 1)], 0.9, k));
    return out;
}

}  // namespace

TEST_CASE("AR(1) two-step law matches the Gaussian closed form") {
    const auto m = ar1_truth();
    const auto g = ck_density(m, NoiseSpec{NoiseKind::normal}, 0.0, 2, GridSpec{-8.0, 8.0, 2001});
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        sup = std::max(sup, std::abs(g.density[i] - normal_density(g.point(i), 1.64)));
    CHECK(sup <= 1e-4);
}

TEST_CASE("AR(1) laws follow the variance recursion at every horizon") {
    const auto laws = ck_densities(ar1_truth(), NoiseSpec{NoiseKind::normal}, 2.0, 5, GridSpec{-10, 10, 2001});
    double var = 0.0, mean = 2.0;
    for (const auto& g : laws) {
        var = 0.64 * var + 1.0;
        mean *= -0.8;
        double sup = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            sup = std::max(sup, std::abs(g.density[i] - normal_density(g.point(i) - mean, var)));
        CAPTURE(g.horizon);
        CHECK(sup <= 1e-4);
    }
}

TEST_CASE("one-step law is the shifted noise density") {
    const auto m = setar211_truth();
    for (auto kind : {NoiseKind::normal, NoiseKind::centered_exponential, NoiseKind::normal_mixture}) {
        const NoiseSpec noise{kind};
        for (double y_n : {-2.0, 1.5}) {
            const auto g = ck_density(m, noise, y_n, 1, default_grid(m, noise, y_n, 1));
            const double mu = (y_n <= 0 ? 0.7 : 0.3) * y_n;
            for (std::size_t i = 0; i < g.size(); i += 37)
                CHECK(g.density[i] == Approx(noise_pdf(noise, g.point(i) - mu)).epsilon(1e-6));
        }
    }
}

TEST_CASE("mass is conserved at every step") {
    const auto m = setar211_truth();
    for (auto kind : {NoiseKind::normal, NoiseKind::centered_exponential, NoiseKind::normal_mixture}) {
        const NoiseSpec noise{kind};
        const auto laws = ck_densities(m, noise, -1.0, 5, default_grid(m, noise, -1.0, 5));
        for (const auto& g : laws) {
            CHECK(g.cdf.front() == 0.0);
            CHECK(g.mass() == Approx(1.0).margin(1e-9));
            // a jump in the density costs the trapezoid rule up to half a cell
            const double tol = kind == NoiseKind::centered_exponential ? g.step() : 1e-6;
            CHECK(g.trapezoid_mass() == Approx(1.0).margin(tol));
            CHECK(g.leakage < 1e-3);
        }
    }
}

TEST_CASE("SETAR quadrature agrees with brute-force simulation") {
    const auto m = setar211_truth();
    const NoiseSpec noise{NoiseKind::normal};
    const auto laws = ck_densities(m, noise, -1.0, 5, default_grid(m, noise, -1.0, 5));
    const auto mc = mc_intervals(m, noise, -1.0, 5, 1'000'000, 2024);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto q = ck_interval(laws[k], 0.9);
        CAPTURE(k + 1, q.lower, mc[k].lower, q.upper, mc[k].upper);
        CHECK(std::abs(q.lower - mc[k].lower) < 0.02);
        CHECK(std::abs(q.upper - mc[k].upper) < 0.02);
    }
}

TEST_CASE("asymmetric noise quadrature agrees with simulation") {
    const auto m = setar211_truth();
    for (auto kind : {NoiseKind::centered_exponential, NoiseKind::normal_mixture}) {
        const NoiseSpec noise{kind};
        const auto laws = ck_densities(m, noise, 0.5, 5, default_grid(m, noise, 0.5, 5));
        const auto mc = mc_intervals(m, noise, 0.5, 5, 1'000'000, 77);
        const double tol = 0.02;
        for (std::size_t k = 0; k < 5; ++k) {
            const auto q = ck_interval(laws[k], 0.9);
            CAPTURE(noise_name(kind), k + 1, q.lower, mc[k].lower, q.upper, mc[k].upper);
            CHECK(std::abs(q.lower - mc[k].lower) < tol);
            CHECK(std::abs(q.upper - mc[k].upper) < tol);
        }
    }
}

TEST_CASE("interval examples") {
    const auto white = make_ar_model({0.0});
    const auto n = ck_interval(ck_density(white, NoiseSpec{NoiseKind::normal}, 0.0, 1, GridSpec{-8, 8, 2001}), 0.9);
    CHECK(n.lower == Approx(-1.6448536).margin(0.002));
    CHECK(n.upper == Approx(1.6448536).margin(0.002));

    const auto e = ck_interval(
        ck_density(white, NoiseSpec{NoiseKind::centered_exponential}, 0.0, 1, GridSpec{-2, 12, 2001}), 0.9);
    CHECK(e.lower == Approx(-std::log(0.95) - 1.0).margin(0.002));
    CHECK(e.upper == Approx(-std::log(0.05) - 1.0).margin(0.002));
    CHECK(e.length() == Approx(2.944439).margin(0.003));

    DensityGrid spike{-1.0, 1.0, 1, std::vector<double>(2001, 0.0), std::vector<double>(2001, 0.0), 0.0};
    for (std::size_t i = 0; i < 2001; ++i) spike.cdf[i] = i < 1000 ? 0.0 : 1.0;
    const auto s = ck_interval(spike, 0.9);
    CHECK(s.length() <= spike.step());

    CHECK_THROWS_AS(ck_interval(spike, 1.0), Error);
    CHECK_THROWS_AS(ck_interval(spike, 0.0), Error);
}

TEST_CASE("halving the grid spacing barely moves the endpoints") {
    const auto m = setar211_truth();
    for (auto kind : {NoiseKind::normal, NoiseKind::centered_exponential, NoiseKind::normal_mixture}) {
        const NoiseSpec noise{kind};
        auto coarse = default_grid(m, noise, -1.0, 5);
        auto fine = coarse;
        fine.points = 2 * coarse.points - 1;
        const auto a = ck_densities(m, noise, -1.0, 5, coarse);
        const auto b = ck_densities(m, noise, -1.0, 5, fine);
        for (std::size_t k = 0; k < 5; ++k) {
            const auto qa = ck_interval(a[k], 0.9), qb = ck_interval(b[k], 0.9);
            CAPTURE(noise_name(kind), k + 1);
            CHECK(std::abs(qa.lower - qb.lower) < 1e-3);
            CHECK(std::abs(qa.upper - qb.upper) < 1e-3);
        }
    }
}

TEST_CASE("narrow grids and unsupported models are rejected") {
    const auto m = ar1_truth();
    try {
        ck_density(m, NoiseSpec{NoiseKind::normal}, 0.0, 2, GridSpec{-1.0, 1.0, 201});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("grid too narrow", 0) == 0);
        CHECK(std::string(e.what()).find("try [-2, 2]") != std::string::npos);
    }
    CHECK_THROWS_AS(ck_density(make_ar_model({0.5, 0.1}), NoiseSpec{}, 0.0, 1, GridSpec{}), Error);
    CHECK_THROWS_AS(ck_density(m, NoiseSpec{}, 0.0, 0, GridSpec{}), Error);
    CHECK_THROWS_AS(ck_density(m, NoiseSpec{}, 0.0, 1, GridSpec{1.0, -1.0, 11}), Error);
}

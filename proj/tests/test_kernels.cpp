#include <doctest.h>

#include <cmath>
#include <random>

#include "tcs/errors.hpp"
#include "tcs/kernels.hpp"
#include "tcs/torus.hpp"

using namespace tcs;

TEST_SUITE("kernels") {

TEST_CASE("torus displacement is the shortest signed representative") {
    CHECK(torus_displacement(0.9, 0.1) == doctest::Approx(-0.2));
    CHECK(torus_displacement(0.1, 0.9) == doctest::Approx(0.2));
    CHECK(torus_dist(0.05, 0.95) == doctest::Approx(0.1));
    CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
    CHECK(wrap_unit(3.5) == doctest::Approx(0.5));
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = u(gen), b = u(gen);
        const double d = torus_displacement(a, b);
        CHECK(d > -0.5 - 1e-15);
        CHECK(d <= 0.5 + 1e-15);
        // d differs from a - b by an integer
        CHECK(std::abs(std::remainder(a - b - d, 1.0)) < 1e-12);
    }
}

TEST_CASE("regular influence halves at unit distance and is non-increasing") {
    for (double lambda : {0.5, 1.0, 2.0, 3.0}) {
        const InfluenceFn phi = InfluenceFn::regular(lambda);
        CHECK(phi.coefficient() == doctest::Approx(std::pow(2.0, 2.0 / lambda) - 1.0));
        CHECK(phi(0.0) == doctest::Approx(1.0));
        CHECK(phi(1.0) == doctest::Approx(0.5));
        CHECK(phi.sup() == doctest::Approx(1.0));
        double prev = phi(0.0);
        for (double d = 0.01; d <= 0.5; d += 0.01) {
            CHECK(phi(d) <= prev);
            prev = phi(d);
        }
    }
}

TEST_CASE("singular influence scales like eps^-lambda at the origin") {
    const InfluenceFn s = InfluenceFn::singular(1.0, 0.05);
    CHECK(s(0.0) == doctest::Approx(20.0));
    CHECK(s(0.3) == doctest::Approx(1.0 / std::sqrt(0.0025 + 3.0 * 0.09)));
    CHECK_THROWS_AS(InfluenceFn::singular(1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(InfluenceFn::regular(-1.0), ConfigError);
    CHECK(InfluenceFn::unit()(0.4) == 1.0);
}

TEST_CASE("bump cutoff has plateau and support") {
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(1.0 / 6.0) == 1.0);
    CHECK(bump(1.0 / 3.0) == 0.0);
    CHECK(bump(0.4) == 0.0);
    double prev = 1.0;
    for (double r = 1.0 / 6.0; r <= 1.0 / 3.0; r += 1e-3) {
        CHECK(bump(r) <= prev + 1e-15);
        prev = bump(r);
    }
}

TEST_CASE("potential gradients are odd and match central differences of the value") {
    for (const AggregationPotential& W : {AggregationPotential::periodic_log_bump(), AggregationPotential::cucker_dong(1.0),
                                          AggregationPotential::cucker_dong(0.5),
                                          AggregationPotential::cucker_dong_scaled(1.0, 0.1)}) {
        for (double x = 0.013; x < 0.49; x += 0.037) {
            CHECK(W.gradient(-x) == doctest::Approx(-W.gradient(x)).epsilon(1e-14));
            const double h = 1e-6;
            const double fd = (W.value(x + h) - W.value(x - h)) / (2.0 * h);
            CHECK(W.gradient(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
        CHECK(W.gradient(0.5) == 0.0);
        CHECK(W.gradient(0.0) == 0.0);
    }
}

TEST_CASE("periodic log-bump potential vanishes beyond one third") {
    const AggregationPotential W = AggregationPotential::periodic_log_bump();
    CHECK(W.value(0.34) == 0.0);
    CHECK(W.gradient(0.34) == 0.0);
    CHECK(W.gradient(-0.45) == 0.0);
    // on the plateau W' = x / (1 + x^2)
    CHECK(W.gradient(0.1) == doctest::Approx(0.1 / 1.01));
    CHECK(W.gradient_sup() >= 0.1 / 1.01);
    CHECK(AggregationPotential::none().is_zero());
    CHECK(AggregationPotential::none().gradient(0.2) == 0.0);
}

}

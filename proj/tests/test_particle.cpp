#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tcs/errors.hpp"
#include "tcs/particle.hpp"
#include "tcs/torus.hpp"

using namespace tcs;

namespace {

std::vector<AgentState> random_agents(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> X(0.0, 1.0), V(-1.0, 1.0), Th(1.0, 3.0);
    std::vector<AgentState> a(n);
    for (AgentState& s : a) s = {X(gen), V(gen), Th(gen)};
    return a;
}

TwoSpeciesSystem random_two_species(std::mt19937_64& gen) {
    TwoSpeciesSystem s;
    s.species1 = random_agents(7, gen);
    s.species2 = random_agents(13, gen);
    s.kappa1 = 1.3;
    s.kappa2 = 0.7;
    s.kappa_c = 0.9;
    s.kappa_a = 0.4;
    s.nu1 = 0.5;
    s.nu2 = 1.1;
    s.nu_c = 0.8;
    s.phi2 = InfluenceFn::regular(2.0);
    s.zeta_c = InfluenceFn::regular(0.5);
    s.W1 = AggregationPotential::periodic_log_bump();
    return s;
}

double sum_v(const std::vector<AgentState>& a) {
    double s = 0.0;
    for (const AgentState& x : a) s += x.v;
    return s;
}

double sum_theta(const std::vector<AgentState>& a) {
    double s = 0.0;
    for (const AgentState& x : a) s += x.theta;
    return s;
}

double v_diameter(const std::vector<AgentState>& a) {
    auto [lo, hi] = std::minmax_element(a.begin(), a.end(), [](auto& p, auto& q) { return p.v < q.v; });
    return hi->v - lo->v;
}

}  // namespace

TEST_SUITE("particle") {

TEST_CASE("single-species rates match the direct double sum") {
    std::mt19937_64 gen(1);
    const auto agents = random_agents(11, gen);
    const InfluenceFn phi = InfluenceFn::regular(1.0), zeta = InfluenceFn::regular(2.0);
    const double kappa = 1.7, nu = 0.6;
    const MicroRates r = micro_rhs(make_tcs(agents, kappa, nu, phi, zeta));
    const double N = static_cast<double>(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        double dv = 0.0, dt = 0.0;
        for (const AgentState& o : agents) {
            const double d = torus_dist(agents[i].x, o.x);
            dv += phi(d) * (o.v / o.theta - agents[i].v / agents[i].theta);
            dt += zeta(d) * (1.0 / agents[i].theta - 1.0 / o.theta);
        }
        CHECK(r.species1[i].x == agents[i].v);
        CHECK(r.species1[i].v == doctest::Approx(kappa / N * dv).epsilon(1e-13).scale(1.0));
        CHECK(r.species1[i].theta == doctest::Approx(nu / N * dt).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("two-species rates conserve momentum and temperature sums") {
    std::mt19937_64 gen(4);
    for (int k = 0; k < 10; ++k) {
        const TwoSpeciesSystem s = random_two_species(gen);
        const MicroRates r = micro_rhs(s);
        double pv = 0.0, pt = 0.0, scale = 0.0;
        for (const auto* v : {&r.species1, &r.species2}) {
            for (const AgentRate& a : *v) {
                pv += a.v;
                pt += a.theta;
                scale += std::abs(a.v) + std::abs(a.theta);
            }
        }
        CHECK(std::abs(pv) < 1e-14 * (1.0 + scale));
        CHECK(std::abs(pt) < 1e-14 * (1.0 + scale));
    }
}

TEST_CASE("species weights follow the population fractions") {
    TwoSpeciesSystem s;
    s.species1.resize(4);
    s.species2.resize(12);
    CHECK(s.w1() == 4.0);
    CHECK(s.w2() == doctest::Approx(16.0 / 12.0));
    s.uniform_weights = true;
    CHECK(s.w1() == 1.0);
    CHECK(s.w2() == 1.0);
}

TEST_CASE("non-positive temperatures are rejected") {
    std::mt19937_64 gen(5);
    auto agents = random_agents(4, gen);
    agents[2].theta = 0.0;
    CHECK_THROWS_AS(micro_rhs(make_tcs(agents, 1.0, 1.0, InfluenceFn::regular(1.0), InfluenceFn::regular(1.0))),
                    DomainError);
}

TEST_CASE("integration conserves sums and stores the requested frames") {
    std::mt19937_64 gen(6);
    const TwoSpeciesSystem s = random_two_species(gen);
    const Trajectory tr = integrate(s, 0.01, 1.0, 30);
    REQUIRE(tr.t.size() == 5);
    CHECK(tr.t.front() == 0.0);
    CHECK(tr.t[1] == doctest::Approx(0.3));
    CHECK(tr.t.back() == doctest::Approx(1.0));
    const double v0 = sum_v(s.species1) + sum_v(s.species2);
    const double t0 = sum_theta(s.species1) + sum_theta(s.species2);
    for (std::size_t n = 0; n < tr.t.size(); ++n) {
        CHECK(std::abs(sum_v(tr.species1[n]) + sum_v(tr.species2[n]) - v0) < 1e-12);
        CHECK(std::abs(sum_theta(tr.species1[n]) + sum_theta(tr.species2[n]) - t0) < 1e-12);
        for (const AgentState& a : tr.species1[n]) {
            CHECK(a.x >= 0.0);
            CHECK(a.x < 1.0);
        }
    }
    CHECK_THROWS_AS(integrate(s, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(integrate(s, 0.1, 1.0, 0), ConfigError);
}

TEST_CASE("RK4 converges at fourth order") {
    std::mt19937_64 gen(7);
    TwoSpeciesSystem s = random_two_species(gen);
    auto final_v = [&](double dt) { return integrate(s, dt, 1.0, 1000000).species1.back(); };
    const auto ref = final_v(0.0025);
    const auto a = final_v(0.05), b = final_v(0.025);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ea = std::max({ea, std::abs(a[i].v - ref[i].v), std::abs(a[i].theta - ref[i].theta)});
        eb = std::max({eb, std::abs(b[i].v - ref[i].v), std::abs(b[i].theta - ref[i].theta)});
    }
    CHECK(std::log2(ea / eb) > 3.5);
}

TEST_CASE("temperature spread contracts and stays positive") {
    std::mt19937_64 gen(8);
    auto agents = random_agents(16, gen);
    const Trajectory tr =
        integrate(make_tcs(agents, 1.0, 1.0, InfluenceFn::regular(1.0), InfluenceFn::regular(1.0)), 0.01, 5.0, 50);
    double prev = 1e300;
    for (const auto& frame : tr.species1) {
        double lo = 1e300, hi = 0.0;
        for (const AgentState& a : frame) {
            lo = std::min(lo, a.theta);
            hi = std::max(hi, a.theta);
        }
        CHECK(lo > 0.0);
        CHECK(hi - lo <= prev + 1e-14);
        prev = hi - lo;
    }
}

TEST_CASE("Cucker-Smale flocks and conserves momentum") {
    std::mt19937_64 gen(9);
    const auto agents = random_agents(20, gen);
    const auto frames = integrate_cs(agents, 2.0, InfluenceFn::regular(1.0), 0.01, 10.0, 100);
    CHECK(frames.size() == 11);
    for (std::size_t n = 1; n < frames.size(); ++n) {
        CHECK(v_diameter(frames[n]) < v_diameter(frames[n - 1]));
        CHECK(std::abs(sum_v(frames[n]) - sum_v(agents)) < 1e-12);
        CHECK(sum_theta(frames[n]) == sum_theta(agents));
    }
    CHECK(v_diameter(frames.back()) < 1e-3 * v_diameter(agents));
}

TEST_CASE("uniform-temperature TCS coincides with rescaled Cucker-Smale") {
    std::mt19937_64 gen(12);
    auto agents = random_agents(16, gen);
    for (AgentState& a : agents) a.theta = 1.7;
    const InfluenceFn phi = InfluenceFn::regular(1.0);
    const Trajectory tr = integrate(make_tcs(agents, 2.0, 1.0, phi, phi), 0.01, 2.0, 20);
    const auto cs = integrate_cs(agents, 2.0 / 1.7, phi, 0.01, 2.0, 20);
    REQUIRE(cs.size() == tr.t.size());
    for (std::size_t n = 0; n < cs.size(); ++n) {
        for (std::size_t i = 0; i < agents.size(); ++i) {
            CHECK(std::abs(tr.species1[n][i].v - cs[n][i].v) < 1e-12);
            CHECK(torus_dist(tr.species1[n][i].x, cs[n][i].x) < 1e-12);
            CHECK(tr.species1[n][i].theta == 1.7);
        }
    }
}

TEST_CASE("empirical moments carry the ensemble averages") {
    std::mt19937_64 gen(10);
    const auto agents = random_agents(50, gen);
    const EmpiricalMoments m = empirical_moments(agents, 64, 0.05);
    CHECK(m.rho.integral() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m.j.integral() == doctest::Approx(sum_v(agents) / 50.0).epsilon(1e-12));
    CHECK(m.h.integral() == doctest::Approx(sum_theta(agents) / 50.0).epsilon(1e-12));
}

TEST_CASE("trajectory CSV has one row per agent and frame") {
    std::mt19937_64 gen(11);
    TwoSpeciesSystem s = random_two_species(gen);
    const Trajectory tr = integrate(s, 0.1, 0.3);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    const std::string text = os.str();
    CHECK(text.rfind("t,species,agent_id,x,v,theta\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 20);
}

}  // TEST_SUITE

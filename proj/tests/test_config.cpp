#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "tcs/config.hpp"
#include "tcs/errors.hpp"

using namespace tcs;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults and explicit keys are read") {
    const ExperimentConfig c = parse(
        "[run]\nscenario = kinetic\nM = 128\nT = 2\nsnapshots = 0.5, 1, 2\n"
        "[regime]\nepsilon = 0.05\nlambda2 = 1.5\npotential = none\n"
        "[kinetic]\nN = 512\nseed = 7\n");
    CHECK(c.scenario == Scenario::kinetic);
    CHECK(c.M == 128);
    CHECK(c.T == 2.0);
    CHECK(c.snapshots == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(c.regime.eps == 0.05);
    CHECK(c.regime.lambda2 == 1.5);
    CHECK(c.potential == PotentialKind::none);
    CHECK(c.kinetic_N == 512);
    CHECK(c.seed == 7);
    CHECK(c.cfl == 0.4);
    CHECK(c.preset == "paper-5.1");
}

TEST_CASE("canonical text round-trips and determines the hash") {
    const ExperimentConfig a = parse("[run]\nscenario = macro-weak\nT = 3\n[regime]\nepsilon = 0.1\n");
    const ExperimentConfig b = parse(a.canonical());
    CHECK(a.canonical() == b.canonical());
    CHECK(fnv1a(a.canonical()) == fnv1a(b.canonical()));
    const ExperimentConfig c = parse("[run]\nscenario = macro-weak\nT = 4\n");
    CHECK(fnv1a(a.canonical()) != fnv1a(c.canonical()));
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("presets expand to the reference initial data") {
    const FluidState bg = preset_background("paper-5.1", 256);
    const GridFn1D e = bg.internal();
    const GridFn1D u = bg.velocity();
    CHECK(e[0] == doctest::Approx(3.0));
    CHECK(e[128] == doctest::Approx(1.0));
    CHECK(u[64] == doctest::Approx(1.5));
    CHECK(bg.rho.min() == 1.0);
    CHECK(bg.rho.max() == 1.0);
    const GridFn1D rho = preset_density("paper-5.1", 256);
    CHECK(rho.integral() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rho[128] / rho[0] == doctest::Approx(std::exp(12.5)).epsilon(1e-12));
    CHECK(preset_theta0("paper-5.2") == 5.0);
    CHECK(preset_theta0("paper-5.1") == 0.0);
    const ExperimentConfig w = parse("[run]\nscenario = kinetic\npreset = paper-5.2\n[regime]\nepsilon = 0.1\n");
    CHECK(w.regime.relaxation == Relaxation::weak);
    CHECK(w.theta0 == 5.0);
    CHECK_THROWS_AS(preset_density("nope", 16), ConfigError);
}

TEST_CASE("malformed input names the line or key") {
    CHECK(error_of("[run]\nscenario = kinetic\n[regime\n").find("line 3") != std::string::npos);
    CHECK(error_of("[run]\nscenario = particle\nM = many\n").find("run.M") != std::string::npos);
    CHECK(error_of("[run]\nscenario = particle\ncolour = red\n").find("run.colour") != std::string::npos);
    CHECK(error_of("[run]\nscenario = particle\n[extra]\nx = 1\n").find("[extra]") != std::string::npos);
    CHECK(error_of("[run]\nM = 64\n").find("run.scenario") != std::string::npos);
    CHECK(error_of("[run]\nscenario = dance\n").find("dance") != std::string::npos);
    CHECK(error_of("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.1\n[sweep]\nepsilons = 0.1,x\n").find("sweep.epsilons") !=
          std::string::npos);
}

TEST_CASE("cross-field validation") {
    CHECK(error_of("[run]\nscenario = kinetic\n").find("epsilon") != std::string::npos);
    CHECK(error_of("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.1\nkernels = singular\nlambda1 = 1.5\n")
              .find("lambda1") != std::string::npos);
    CHECK(error_of("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.05\nkernels = singular\nlambda1 = 0.5\n")
              .find("D_theta") != std::string::npos);
    CHECK(error_of("[run]\nscenario = macro-strong\n[regime]\nrelaxation = weak\n").find("contradicts") !=
          std::string::npos);
    CHECK(error_of("[run]\nscenario = particle\nT = -1\n").find("run.T") != std::string::npos);
    CHECK(error_of("[run]\nscenario = macro-strong\nT = 2\nsnapshots = 3\n").find("snapshots") != std::string::npos);
    CHECK(error_of("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.1\npotential = cucker-dong\n").find("lambda3") !=
          std::string::npos);
}

TEST_CASE("the compatibility condition produces a warning, not an error") {
    const ExperimentConfig ok = parse("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.05\n");
    CHECK(ok.warnings.empty());
    const ExperimentConfig warn =
        parse("[run]\nscenario = kinetic\n[regime]\nepsilon = 0.05\n[kinetic]\ntheta_lo = 1.0\ntheta_hi = 2.0\n");
    REQUIRE(warn.warnings.size() == 1);
    CHECK(warn.warnings[0].find("compatibility") != std::string::npos);
}

TEST_CASE("potential selection") {
    const ExperimentConfig c =
        parse("[run]\nscenario = macro-strong\n[regime]\npotential = cucker-dong-scaled\nlambda3 = 2\nepsilon = 0.1\n");
    const AggregationPotential W = c.potential_fn();
    CHECK(W.kind() == AggregationPotential::Kind::cucker_dong_scaled);
    CHECK(W.lambda() == 2.0);
    CHECK(W.eps() == 0.1);
    CHECK(parse("[run]\nscenario = macro-strong\n").potential_fn().kind() ==
          AggregationPotential::Kind::periodic_log_bump);
}

TEST_CASE("scenario names round-trip") {
    for (Scenario s : {Scenario::background_only, Scenario::macro_strong, Scenario::macro_weak, Scenario::kinetic,
                       Scenario::particle, Scenario::epsilon_sweep}) {
        CHECK(parse_scenario(to_string(s)) == s);
    }
}

}  // TEST_SUITE

#include "tcs/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tcs/errors.hpp"

namespace tcs {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"run", {"scenario", "preset", "M", "T", "cfl", "output", "snapshots", "deterministic"}},
        {"regime", {"relaxation", "kernels", "epsilon", "lambda1", "lambda2", "lambda3", "potential"}},
        {"initial", {"theta0"}},
        {"fluid", {"cfl"}},
        {"kinetic", {"N", "dt", "sigma_v", "theta_lo", "theta_hi", "seed"}},
        {"particle", {"N", "dt", "kappa", "nu", "theta_lo", "theta_hi", "seed", "stride"}},
        {"sweep", {"epsilons", "M", "N", "bandwidth", "parallel"}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    bool has(const std::string& key) const { return tree_.get_optional<std::string>(pt::ptree::path_type(key, '.')).has_value(); }

    std::string text(const std::string& key) const {
        return boost::trim_copy(tree_.get<std::string>(pt::ptree::path_type(key, '.')));
    }

    template <class T>
    void get(const std::string& key, T& out) const {
        if (!has(key)) return;
        const std::string s = text(key);
        std::istringstream is(s);
        T v{};
        is >> v;
        if (!is || !(is >> std::ws).eof()) throw ConfigError("key '" + key + "': cannot parse value '" + s + "'");
        out = v;
    }

    void get(const std::string& key, std::string& out) const {
        if (has(key)) out = text(key);
    }

    void get_bool(const std::string& key, bool& out) const {
        if (!has(key)) return;
        const std::string s = boost::to_lower_copy(text(key));
        if (s == "true" || s == "1" || s == "yes" || s == "on") {
            out = true;
        } else if (s == "false" || s == "0" || s == "no" || s == "off") {
            out = false;
        } else {
            throw ConfigError("key '" + key + "': expected a boolean, got '" + s + "'");
        }
    }

    void get_list(const std::string& key, std::vector<double>& out) const {
        if (!has(key)) return;
        std::vector<std::string> parts;
        const std::string s = text(key);
        boost::split(parts, s, boost::is_any_of(","));
        std::vector<double> v;
        for (std::string p : parts) {
            boost::trim(p);
            if (p.empty()) continue;
            try {
                std::size_t used = 0;
                v.push_back(std::stod(p, &used));
                if (used != p.size()) throw std::invalid_argument(p);
            } catch (const std::exception&) {
                throw ConfigError("key '" + key + "': cannot parse list entry '" + p + "'");
            }
        }
        out = v;
    }

private:
    const pt::ptree& tree_;
};

PotentialKind parse_potential(const std::string& s) {
    if (s == "none") return PotentialKind::none;
    if (s == "periodic-log-bump") return PotentialKind::periodic_log_bump;
    if (s == "cucker-dong") return PotentialKind::cucker_dong;
    if (s == "cucker-dong-scaled") return PotentialKind::cucker_dong_scaled;
    throw ConfigError("key 'regime.potential': unknown potential '" + s + "'");
}

const char* potential_name(PotentialKind k) {
    switch (k) {
        case PotentialKind::none: return "none";
        case PotentialKind::periodic_log_bump: return "periodic-log-bump";
        case PotentialKind::cucker_dong: return "cucker-dong";
        case PotentialKind::cucker_dong_scaled: return "cucker-dong-scaled";
    }
    return "?";
}

void check_known_preset(const std::string& p) {
    if (p != "paper-5.1" && p != "paper-5.2") throw ConfigError("key 'run.preset': unknown preset '" + p + "'");
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

bool is_macro(Scenario s) { return s == Scenario::macro_strong || s == Scenario::macro_weak; }

}  // namespace

const char* to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::background_only: return "background-only";
        case Scenario::macro_strong: return "macro-strong";
        case Scenario::macro_weak: return "macro-weak";
        case Scenario::kinetic: return "kinetic";
        case Scenario::particle: return "particle";
        case Scenario::epsilon_sweep: return "epsilon-sweep";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::background_only, Scenario::macro_strong, Scenario::macro_weak, Scenario::kinetic,
                       Scenario::particle, Scenario::epsilon_sweep}) {
        if (name == to_string(s)) return s;
    }
    throw ConfigError("key 'run.scenario': unknown scenario '" + name + "'");
}

AggregationPotential ExperimentConfig::potential_fn() const {
    switch (potential) {
        case PotentialKind::none: return AggregationPotential::none();
        case PotentialKind::periodic_log_bump: return AggregationPotential::periodic_log_bump();
        case PotentialKind::cucker_dong: return AggregationPotential::cucker_dong(regime.lambda3.value_or(1.0));
        case PotentialKind::cucker_dong_scaled:
            return AggregationPotential::cucker_dong_scaled(regime.lambda3.value_or(1.0), regime.eps);
    }
    return AggregationPotential::none();
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "[run]\nscenario = " << to_string(scenario) << "\npreset = " << preset << "\nM = " << M << "\nT = " << T
       << "\ncfl = " << cfl << "\nsnapshots = " << join(snapshots) << "\ndeterministic = " << (deterministic ? "true" : "false")
       << "\n[regime]\nrelaxation = " << to_string(regime.relaxation) << "\nkernels = " << to_string(regime.kernels)
       << "\nepsilon = " << regime.eps << "\nlambda1 = " << regime.lambda1 << "\nlambda2 = " << regime.lambda2;
    if (regime.lambda3) os << "\nlambda3 = " << *regime.lambda3;
    os << "\npotential = " << potential_name(potential) << "\n[initial]\ntheta0 = " << theta0
       << "\n[fluid]\ncfl = " << fluid_cfl << "\n[kinetic]\nN = " << kinetic_N << "\ndt = " << kinetic_dt
       << "\nsigma_v = " << sigma_v << "\ntheta_lo = " << theta_lo << "\ntheta_hi = " << theta_hi << "\nseed = " << seed
       << "\n[particle]\nN = " << particle_N << "\ndt = " << particle_dt << "\nkappa = " << kappa << "\nnu = " << nu
       << "\nstride = " << stride << "\n[sweep]\nepsilons = " << join(sweep_eps) << "\nM = " << sweep_M
       << "\nN = " << sweep_N << "\nbandwidth = " << bandwidth << "\nparallel = " << (parallel ? "true" : "false")
       << '\n';
    return os.str();
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream os;
        os << source << ", line " << e.line() << ": " << e.message();
        throw ConfigError(os.str());
    }
    for (const auto& [section, keys] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) {
            if (keys.empty()) throw ConfigError(source + ": key '" + section + "' must be inside a section");
            throw ConfigError(source + ": unknown section [" + section + "]");
        }
        for (const auto& kv : keys) {
            if (!it->second.count(kv.first)) throw ConfigError(source + ": unknown key '" + section + "." + kv.first + "'");
        }
    }

    const Reader r(tree);
    ExperimentConfig c;
    try {
        if (!r.has("run.scenario")) throw ConfigError("missing required key 'run.scenario'");
        c.scenario = parse_scenario(r.text("run.scenario"));
        r.get("run.preset", c.preset);
        check_known_preset(c.preset);
        c.theta0 = preset_theta0(c.preset);
        if (c.preset == "paper-5.2") c.regime.relaxation = Relaxation::weak;
        if (c.scenario == Scenario::macro_strong) c.regime.relaxation = Relaxation::strong;
        if (c.scenario == Scenario::macro_weak) c.regime.relaxation = Relaxation::weak;

        r.get("run.M", c.M);
        r.get("run.T", c.T);
        r.get("run.cfl", c.cfl);
        r.get("run.output", c.output);
        r.get_list("run.snapshots", c.snapshots);
        r.get_bool("run.deterministic", c.deterministic);

        if (r.has("regime.relaxation")) {
            const std::string s = r.text("regime.relaxation");
            if (s == "strong") {
                c.regime.relaxation = Relaxation::strong;
            } else if (s == "weak") {
                c.regime.relaxation = Relaxation::weak;
            } else {
                throw ConfigError("key 'regime.relaxation': expected strong or weak, got '" + s + "'");
            }
            if ((c.scenario == Scenario::macro_strong && c.regime.relaxation != Relaxation::strong) ||
                (c.scenario == Scenario::macro_weak && c.regime.relaxation != Relaxation::weak)) {
                throw ConfigError("key 'regime.relaxation' contradicts scenario " + std::string(to_string(c.scenario)));
            }
        }
        if (r.has("regime.kernels")) {
            const std::string s = r.text("regime.kernels");
            if (s == "regular") {
                c.regime.kernels = KernelFamily::regular;
            } else if (s == "singular") {
                c.regime.kernels = KernelFamily::singular;
            } else {
                throw ConfigError("key 'regime.kernels': expected regular or singular, got '" + s + "'");
            }
        }
        c.eps_given = r.has("regime.epsilon");
        r.get("regime.epsilon", c.regime.eps);
        r.get("regime.lambda1", c.regime.lambda1);
        r.get("regime.lambda2", c.regime.lambda2);
        if (r.has("regime.lambda3")) {
            double l3 = 0.0;
            r.get("regime.lambda3", l3);
            c.regime.lambda3 = l3;
        }
        if (r.has("regime.potential")) c.potential = parse_potential(r.text("regime.potential"));

        r.get("initial.theta0", c.theta0);
        r.get("fluid.cfl", c.fluid_cfl);

        r.get("kinetic.N", c.kinetic_N);
        r.get("kinetic.dt", c.kinetic_dt);
        r.get("kinetic.sigma_v", c.sigma_v);
        r.get("kinetic.theta_lo", c.theta_lo);
        r.get("kinetic.theta_hi", c.theta_hi);
        r.get("kinetic.seed", c.seed);

        r.get("particle.N", c.particle_N);
        r.get("particle.dt", c.particle_dt);
        r.get("particle.kappa", c.kappa);
        r.get("particle.nu", c.nu);
        r.get("particle.theta_lo", c.theta_lo);
        r.get("particle.theta_hi", c.theta_hi);
        r.get("particle.seed", c.seed);
        r.get("particle.stride", c.stride);

        r.get_list("sweep.epsilons", c.sweep_eps);
        r.get("sweep.M", c.sweep_M);
        r.get("sweep.N", c.sweep_N);
        r.get("sweep.bandwidth", c.bandwidth);
        r.get_bool("sweep.parallel", c.parallel);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

void validate(ExperimentConfig& c) {
    c.warnings.clear();
    if (c.M < 16) throw ConfigError("run.M must be at least 16");
    if (!(c.T > 0.0)) throw ConfigError("run.T must be positive");
    if (!(c.cfl > 0.0) || c.cfl > 1.0) throw ConfigError("run.cfl must lie in (0, 1]");
    if (!(c.fluid_cfl > 0.0) || c.fluid_cfl > 1.0) throw ConfigError("fluid.cfl must lie in (0, 1]");
    for (double s : c.snapshots) {
        if (s < 0.0 || s > c.T) throw ConfigError("run.snapshots must lie in [0, T]");
    }
    if (c.regime.kernels == KernelFamily::singular && c.regime.lambda1 > 1.0) {
        std::ostringstream os;
        os << "singular kernels require lambda1 in (0, 1]; got lambda1 = " << c.regime.lambda1;
        throw ConfigError(os.str());
    }
    if ((c.potential == PotentialKind::cucker_dong || c.potential == PotentialKind::cucker_dong_scaled) &&
        !c.regime.lambda3) {
        throw ConfigError("potential " + std::string(potential_name(c.potential)) + " requires lambda3");
    }

    const bool kinetic = c.scenario == Scenario::kinetic;
    if (kinetic && !c.eps_given) throw ConfigError("kinetic scenario requires 'epsilon' in [regime]");
    if (kinetic || c.scenario == Scenario::epsilon_sweep) {
        if (!(c.theta_lo > 0.0) || c.theta_hi < c.theta_lo) throw ConfigError("kinetic theta_lo/theta_hi must satisfy 0 < lo <= hi");
        if (!(c.kinetic_dt > 0.0)) throw ConfigError("kinetic.dt must be positive");
        if (c.kinetic_N == 0 || c.sweep_N == 0) throw ConfigError("particle count N must be positive");
        if (!(c.sigma_v >= 0.0)) throw ConfigError("kinetic.sigma_v must be non-negative");
        if (kinetic) c.regime.validate();
        for (double e : c.sweep_eps) {
            if (!(e > 0.0)) throw ConfigError("sweep.epsilons must be positive");
        }

        const FluidState bg = preset_background(c.preset, 16);
        const GridFn1D e = bg.internal();
        const double eps_min = kinetic ? c.regime.eps : *std::min_element(c.sweep_eps.begin(), c.sweep_eps.end());
        const ConcentrationBounds b = concentration_bounds(c.theta_lo, c.theta_hi, e.min(), e.max(), eps_min);
        if (!b.compatible) {
            std::ostringstream os;
            os << "compatibility condition fails: theta_M0 - theta_m0 = " << c.theta_hi - c.theta_lo
               << " is not below theta_m^2/theta_M = " << b.theta_m * b.theta_m / b.theta_M;
            c.warnings.push_back(os.str());
        }
        if (c.regime.kernels == KernelFamily::singular && !b.strongly_concentrated) {
            std::ostringstream os;
            os << "singular kernels require D_theta(0)/epsilon < theta_m^2/theta_M; got "
               << (c.theta_hi - c.theta_lo) / eps_min << " >= " << b.theta_m * b.theta_m / b.theta_M;
            throw ConfigError(os.str());
        }
    }
    if (c.scenario == Scenario::particle) {
        if (c.particle_N == 0) throw ConfigError("particle.N must be positive");
        if (!(c.particle_dt > 0.0)) throw ConfigError("particle.dt must be positive");
        if (c.stride == 0) throw ConfigError("particle.stride must be positive");
        if (!(c.theta_lo > 0.0) || c.theta_hi < c.theta_lo) throw ConfigError("particle theta_lo/theta_hi must satisfy 0 < lo <= hi");
    }
    if (c.scenario == Scenario::epsilon_sweep) {
        if (c.sweep_eps.empty()) throw ConfigError("sweep.epsilons must not be empty");
        if (c.sweep_M < 16) throw ConfigError("sweep.M must be at least 16");
        if (!(c.bandwidth > 0.0)) throw ConfigError("sweep.bandwidth must be positive");
    }
    if (is_macro(c.scenario) && c.theta0 < 0.0) throw ConfigError("initial.theta0 must be non-negative");
}

FluidState preset_background(const std::string& preset, std::size_t M) {
    check_known_preset(preset);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const GridFn1D rho(M, 1.0);
    const GridFn1D u = GridFn1D::from_function(M, [](double x) { return 0.5 + std::sin(two_pi * x); });
    const GridFn1D e = GridFn1D::from_function(M, [](double x) { return 2.0 + std::cos(two_pi * x); });
    return FluidState::from_primitive(rho, u, e);
}

GridFn1D preset_density(const std::string& preset, std::size_t M) {
    check_known_preset(preset);
    // [x] is the representative of x in [0, 1)
    GridFn1D rho = GridFn1D::from_function(M, [](double x) {
        const double d = x - 0.5;
        return std::exp(-50.0 * d * d);
    });
    const double Z = rho.integral();
    for (double& v : rho.values()) v /= Z;
    return rho;
}

double preset_theta0(const std::string& preset) {
    check_known_preset(preset);
    return preset == "paper-5.2" ? 5.0 : 0.0;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace tcs

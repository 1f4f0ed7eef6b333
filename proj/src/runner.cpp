#include "tcs/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <json.hpp>

#include "tcs/diagnostics.hpp"
#include "tcs/errors.hpp"
#include "tcs/macro.hpp"
#include "tcs/particle.hpp"
#include "tcs/sweep.hpp"

namespace tcs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

class Outputs {
public:
    Outputs(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {}

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name);
        if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
        out.precision(17);
        return out;
    }

    void add(const std::string& name, std::size_t rows) { manifest_.files.push_back({name, rows}); }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    RunManifest& manifest_;
};

void write_background_series(Outputs& o, const std::vector<BackgroundRecord>& records) {
    auto out = o.open("background_series.csv");
    out << "t,theta_inf,u_inf_over_theta_inf,fluct_u,fluct_e\n";
    for (const BackgroundRecord& r : records) {
        out << r.t << ',' << r.theta_inf << ',' << r.u_over_theta << ',' << r.fluct_u << ',' << r.fluct_e << '\n';
    }
    o.add("background_series.csv", records.size());
}

void write_json(Outputs& o, const std::string& name, const json& j) {
    auto out = o.open(name);
    out << j.dump(2) << '\n';
    o.add(name, 1);
}

json run_background(const ExperimentConfig& c, Outputs& o, std::ostream& log) {
    FluidParams params;
    params.cfl = c.fluid_cfl;
    params.phi = InfluenceFn::regular(c.regime.lambda1);
    params.zeta = InfluenceFn::regular(c.regime.lambda2);
    BackgroundSolver solver(preset_background(c.preset, c.M), params);

    std::vector<double> snaps = c.snapshots;
    snaps.push_back(c.T);
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    auto fields = o.open("background_fields.csv");
    fields << "t,x,rho,u,e\n";
    std::size_t rows = 0;
    auto dump = [&]() {
        const FluidState s = to_regular_grid(solver.state());
        const GridFn1D u = s.velocity(params.rho_floor);
        const GridFn1D e = s.internal(params.rho_floor);
        for (std::size_t i = 0; i < s.size(); ++i) {
            fields << s.t << ',' << s.rho.node(i) << ',' << s.rho[i] << ',' << u[i] << ',' << e[i] << '\n';
            ++rows;
        }
    };
    std::size_t next = 0;
    if (!snaps.empty() && snaps[0] <= 0.0) {
        dump();
        ++next;
    }
    for (; next < snaps.size(); ++next) {
        solver.advance_to(snaps[next]);
        dump();
        log << "  background t = " << solver.t() << ", steps " << solver.steps() << '\n';
    }
    o.add("background_fields.csv", rows);
    write_background_series(o, solver.records());

    const auto& r = solver.records().back();
    const auto t0 = solver.initial_totals();
    const auto t1 = solver.totals();
    auto rel = [](double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); };
    return json{{"steps", solver.steps()},
                {"theta_inf_final", r.theta_inf},
                {"u_over_theta_final", r.u_over_theta},
                {"fluct_u_final", r.fluct_u},
                {"fluct_e_final", r.fluct_e},
                {"mass_drift", rel(t0.mass, t1.mass)},
                {"momentum_drift", rel(t0.momentum, t1.momentum)},
                {"energy_drift", rel(t0.energy, t1.energy)},
                {"envelope_excess", solver.envelope_excess()}};
}

json run_macro_scenario(const ExperimentConfig& c, Outputs& o, std::ostream& log) {
    MacroConfig mc;
    mc.regime = c.scenario == Scenario::macro_weak ? Relaxation::weak : Relaxation::strong;
    mc.T = c.T;
    mc.cfl = c.cfl;
    mc.theta0 = c.theta0;
    mc.phi = InfluenceFn::regular(c.regime.lambda1);
    mc.W = c.potential_fn();
    mc.fluid.cfl = c.fluid_cfl;
    mc.fluid.phi = InfluenceFn::regular(c.regime.lambda1);
    mc.fluid.zeta = InfluenceFn::regular(c.regime.lambda2);
    mc.snapshot_times = c.snapshots;
    if (std::find(mc.snapshot_times.begin(), mc.snapshot_times.end(), c.T) == mc.snapshot_times.end())
        mc.snapshot_times.push_back(c.T);

    const MacroRun run = run_macro(mc, preset_density(c.preset, c.M), preset_background(c.preset, c.M));
    log << "  macro " << to_string(mc.regime) << ": " << run.steps << " steps, R(T) = " << run.records.back().R << '\n';

    auto series = o.open("macro_series.csv");
    series << "t,R,theta,theta_inf,max_u\n";
    for (const MacroRecord& r : run.records) {
        series << r.t << ',' << r.R << ',' << r.theta << ',' << r.theta_inf << ',' << r.max_u << '\n';
    }
    o.add("macro_series.csv", run.records.size());

    auto snaps = o.open("macro_snapshots.csv");
    snaps << "t,x,rho,u\n";
    std::size_t rows = 0;
    for (const MacroSnapshot& s : run.snapshots) {
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            snaps << s.t << ',' << s.rho.node(i) << ',' << s.rho[i] << ',' << s.u[i] << '\n';
            ++rows;
        }
    }
    o.add("macro_snapshots.csv", rows);
    write_background_series(o, run.background);

    return json{{"steps", run.steps},
                {"R_final", run.records.back().R},
                {"theta_final", run.final_state.theta},
                {"max_clip", run.max_clip},
                {"max_residual", run.max_residual},
                {"max_mass_drift", run.max_mass_drift}};
}

json run_kinetic(const ExperimentConfig& c, Outputs& o, std::ostream& log) {
    const FluidState bg0 = preset_background(c.preset, c.M);
    FluidParams params;
    params.cfl = c.fluid_cfl;
    auto src = precompute_background(bg0, params, c.T + 0.05);
    const GridFn1D rho0 = preset_density(c.preset, c.M);

    CloudInit init;
    init.rho0 = rho0;
    init.u0 = GridFn1D(c.M);
    init.sigma_v = c.sigma_v;
    init.theta_lo = c.theta_lo;
    init.theta_hi = c.theta_hi;
    init.N = c.kinetic_N;
    init.seed = c.seed;
    std::vector<Particle> cloud0 = sample_initial_cloud(init);
    double mean = 0.0;
    for (const Particle& p : cloud0) mean += p.weight * p.theta;
    const double th_inf0 = src->theta_inf(0.0);
    const double theta0 = c.regime.relaxation == Relaxation::weak ? mean : th_inf0;
    const AggregationPotential W = c.potential_fn();
    const VelocitySolution v0 =
        solve_velocity(rho0, InfluenceFn::regular(c.regime.lambda1), W, theta0 / th_inf0 * src->u_inf(0.0), theta0);
    for (Particle& p : cloud0) p.v += interpolate_periodic(v0.u, p.x);

    KineticCloud cloud(cloud0, c.regime, W, src);
    AdvanceOptions opt;
    opt.dt = c.kinetic_dt;
    opt.T = c.T;
    opt.snapshot_times = c.snapshots;
    const KineticRun run = advance(cloud, opt);
    log << "  kinetic eps = " << c.regime.eps << ": " << run.steps << " steps of " << run.step_size << '\n';

    auto series = o.open("kinetic_series.csv");
    series << "t,theta_min,theta_max,theta_mean,theta_inf,D_v,R_v,v2_moment\n";
    for (const KineticSample& s : run.samples) {
        series << s.t << ',' << s.theta_min << ',' << s.theta_max << ',' << s.theta_mean << ',' << s.theta_inf << ','
               << s.D_v << ',' << s.R_v << ',' << s.v2_moment << '\n';
    }
    o.add("kinetic_series.csv", run.samples.size());

    auto snaps = o.open("kinetic_snapshots.csv");
    snaps << "t,id,x,v,theta,weight\n";
    std::size_t rows = 0;
    for (const KineticSnapshot& s : run.snapshots) {
        for (std::size_t p = 0; p < s.particles.size(); ++p) {
            const Particle& q = s.particles[p];
            snaps << s.t << ',' << p << ',' << q.x << ',' << q.v << ',' << q.theta << ',' << q.weight << '\n';
            ++rows;
        }
    }
    o.add("kinetic_snapshots.csv", rows);

    const GridFn1D e0 = bg0.internal();
    const ConcentrationBounds b = concentration_bounds(c.theta_lo, c.theta_hi, e0.min(), e0.max(), c.regime.eps);
    std::size_t violations = 0;
    std::vector<double> t, d;
    for (const KineticSample& s : run.samples) {
        if (s.theta_min < b.theta_m || s.theta_max > b.theta_M) ++violations;
        t.push_back(s.t);
        d.push_back(s.theta_max - s.theta_min);
    }
    json j{{"steps", run.steps},
           {"step_size", run.step_size},
           {"theta_m", b.theta_m},
           {"theta_M", b.theta_M},
           {"lemma_rate", b.decay_rate},
           {"compatible", b.compatible},
           {"confinement_violations", violations},
           {"theta_inf_rate_observed", src->theta_rate_max()},
           {"theta_inf_rate_bound", theta_inf_rate_bound(InfluenceFn::regular(c.regime.lambda2)(0.0), e0.min(), e0.max())}};
    const auto window = decay_fit_window(c.regime.eps, b.theta_M);
    try {
        const RateFit f = fit_decay(t, d, window.first, window.second);
        j["fitted_rate"] = f.rate;
        j["fit_residual"] = f.residual;
    } catch (const Error& e) {
        j["fit_error"] = e.what();
    }
    return j;
}

json run_particle(const ExperimentConfig& c, Outputs& o, std::ostream& log) {
    std::mt19937_64 gen(c.seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ut(c.theta_lo, c.theta_hi);
    std::normal_distribution<double> nv(0.0, 1.0);
    std::vector<AgentState> agents(c.particle_N);
    for (AgentState& a : agents) {
        a.x = ux(gen);
        a.v = nv(gen);
        a.theta = ut(gen);
    }
    const TwoSpeciesSystem s = make_tcs(agents, c.kappa, c.nu, InfluenceFn::regular(c.regime.lambda1),
                                        InfluenceFn::regular(c.regime.lambda2));
    const Trajectory traj = integrate(s, c.particle_dt, c.T, c.stride);
    log << "  particle: " << traj.t.size() << " stored states, " << traj.halvings << " halvings\n";

    auto out = o.open("trajectory.csv");
    write_trajectory_csv(out, traj);
    o.add("trajectory.csv", traj.t.size() * c.particle_N);

    auto series = o.open("particle_series.csv");
    series << "t,sum_v,sum_theta,D_v,D_theta\n";
    double drift_v = 0.0, drift_t = 0.0;
    double sv0 = 0.0, st0 = 0.0;
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        double sv = 0.0, st = 0.0;
        double vmin = 1e300, vmax = -1e300, tmin = 1e300, tmax = -1e300;
        for (const AgentState& a : traj.species1[n]) {
            sv += a.v;
            st += a.theta;
            vmin = std::min(vmin, a.v);
            vmax = std::max(vmax, a.v);
            tmin = std::min(tmin, a.theta);
            tmax = std::max(tmax, a.theta);
        }
        if (n == 0) {
            sv0 = sv;
            st0 = st;
        }
        drift_v = std::max(drift_v, std::abs(sv - sv0) / std::max(1.0, std::abs(sv0)));
        drift_t = std::max(drift_t, std::abs(st - st0) / std::abs(st0));
        series << traj.t[n] << ',' << sv << ',' << st << ',' << vmax - vmin << ',' << tmax - tmin << '\n';
    }
    o.add("particle_series.csv", traj.t.size());
    return json{{"halvings", traj.halvings}, {"momentum_drift", drift_v}, {"theta_drift", drift_t}};
}

json run_sweep(const ExperimentConfig& c, Outputs& o, std::ostream& log) {
    SweepConfig sc;
    sc.regime = c.regime.relaxation;
    sc.kernels = c.regime.kernels;
    sc.epsilons = c.sweep_eps;
    if (!c.snapshots.empty()) sc.snapshot_times = c.snapshots;
    sc.M = c.sweep_M;
    sc.N = c.sweep_N;
    sc.bandwidth = c.bandwidth;
    sc.dt = c.kinetic_dt;
    sc.cfl = c.cfl;
    sc.sigma_v = c.sigma_v;
    sc.theta_lo = c.theta_lo;
    sc.theta_hi = c.theta_hi;
    sc.seed = c.seed;
    sc.W = c.potential_fn();
    sc.fluid.cfl = c.fluid_cfl;
    sc.parallel = c.parallel && !c.deterministic;

    const LimitComparison cmp =
        epsilon_sweep(sc, preset_density(c.preset, sc.M), preset_background(c.preset, sc.M));
    print_sweep_summary(log, cmp);
    {
        auto out = o.open("sweep_report.json");
        write_sweep_report(out, cmp);
        o.add("sweep_report.json", 1);
    }
    auto d = o.open("sweep_distances.csv");
    d << "eps,t,w1_rho,bl_j\n";
    std::size_t rows = 0;
    for (std::size_t k = 0; k < cmp.rho_distance.size(); ++k) {
        for (std::size_t s = 0; s < cmp.snapshots.size(); ++s) {
            d << cmp.epsilons[k] << ',' << cmp.snapshots[s] << ',' << cmp.rho_distance[k][s] << ','
              << cmp.j_distance[k][s] << '\n';
            ++rows;
        }
    }
    o.add("sweep_distances.csv", rows);
    if (!cmp.complete) throw NumericError("epsilon sweep aborted: " + cmp.error);
    return json{{"monotone", cmp.monotone}};
}

std::string hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    boost::split(header, line, boost::is_any_of(","));
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> parts;
        boost::split(parts, line, boost::is_any_of(","));
        std::vector<double> row;
        for (const std::string& p : parts) row.push_back(std::stod(p));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvariantViolation("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string version_string() { return kVersion; }

fs::path output_root() {
    const char* env = std::getenv("TCS_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path("output");
}

fs::path run_directory(const ExperimentConfig& c) {
    if (!c.output.empty()) {
        const fs::path p(c.output);
        return p.is_absolute() ? p : output_root() / p;
    }
    return output_root() / (std::string(to_string(c.scenario)) + "-" + hex(fnv1a(c.canonical())).substr(0, 8));
}

void write_manifest(const fs::path& path, const RunManifest& m) {
    json files = json::array();
    for (const FileEntry& f : m.files) files.push_back({{"name", f.name}, {"rows", f.rows}});
    const json j{{"config_hash", m.config_hash},
                 {"scenario", m.scenario},
                 {"version", m.version},
                 {"config", m.config_text},
                 {"wall_seconds", m.wall_seconds},
                 {"complete", m.complete},
                 {"error", m.error},
                 {"exit_code", m.exit_code},
                 {"files", files},
                 {"warnings", m.warnings}};
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
    json j;
    try {
        in >> j;
        RunManifest m;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.scenario = j.at("scenario").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.config_text = j.at("config").get<std::string>();
        m.wall_seconds = j.at("wall_seconds").get<double>();
        m.complete = j.at("complete").get<bool>();
        m.error = j.at("error").get<std::string>();
        m.exit_code = j.at("exit_code").get<int>();
        for (const json& f : j.at("files")) m.files.push_back({f.at("name").get<std::string>(), f.at("rows").get<std::size_t>()});
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError("malformed manifest '" + path.string() + "': " + e.what());
    }
}

RunManifest run(const ExperimentConfig& c, std::ostream& log) {
    const fs::path dir = run_directory(c);
    fs::create_directories(dir);
    RunManifest m;
    m.config_text = c.canonical();
    m.config_hash = hex(fnv1a(m.config_text));
    m.scenario = to_string(c.scenario);
    m.version = kVersion;
    m.warnings = c.warnings;
    const fs::path manifest_path = dir / "manifest.json";
    write_manifest(manifest_path, m);
    for (const std::string& w : c.warnings) log << "warning: " << w << '\n';
    log << "run " << m.scenario << " -> " << dir.string() << '\n';

    Outputs out(dir, m);
    const auto start = std::chrono::steady_clock::now();
    try {
        json summary;
        switch (c.scenario) {
            case Scenario::background_only: summary = run_background(c, out, log); break;
            case Scenario::macro_strong:
            case Scenario::macro_weak: summary = run_macro_scenario(c, out, log); break;
            case Scenario::kinetic: summary = run_kinetic(c, out, log); break;
            case Scenario::particle: summary = run_particle(c, out, log); break;
            case Scenario::epsilon_sweep: summary = run_sweep(c, out, log); break;
        }
        write_json(out, "summary.json", summary);
        m.complete = true;
    } catch (const Error& e) {
        m.error = e.what();
        m.exit_code = e.exit_code();
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(manifest_path, m);
        throw;
    }
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest_path, m);
    log << "done in " << m.wall_seconds << " s\n";
    return m;
}

CheckReport check_manifest(const fs::path& manifest_path) {
    const RunManifest m = read_manifest(manifest_path);
    const fs::path dir = manifest_path.parent_path();
    CheckReport r;
    auto expect = [&r](bool ok, const std::string& what) { (ok ? r.passed : r.failed).push_back(what); };

    expect(m.complete, "manifest marked complete");
    expect(hex(fnv1a(m.config_text)) == m.config_hash, "config hash matches stored config");

    for (const FileEntry& f : m.files) {
        const fs::path p = dir / f.name;
        if (!fs::exists(p)) {
            expect(false, f.name + " exists");
            continue;
        }
        if (p.extension() != ".csv") {
            std::ifstream in(p);
            json j;
            bool parsed = true;
            try {
                in >> j;
            } catch (const json::exception&) {
                parsed = false;
            }
            expect(parsed, f.name + " parses as JSON");
            if (parsed && f.name == "sweep_report.json") {
                bool nonneg = true;
                for (const auto& row : j.at("distances").at("rho_w1"))
                    for (double v : row) nonneg = nonneg && v >= 0.0;
                for (const auto& row : j.at("distances").at("j_bounded_lipschitz"))
                    for (double v : row) nonneg = nonneg && v >= 0.0;
                expect(nonneg, "sweep distances are non-negative");
            }
            continue;
        }
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;
        try {
            rows = read_csv(p, header);
        } catch (const std::exception& e) {
            expect(false, f.name + " parses: " + e.what());
            continue;
        }
        expect(rows.size() == f.rows, f.name + " has " + std::to_string(f.rows) + " rows");
        try {
            if (f.name == "background_series.csv" || f.name == "macro_series.csv" || f.name == "kinetic_series.csv" ||
                f.name == "particle_series.csv") {
                const std::size_t ct = column(header, "t");
                bool inc = true;
                for (std::size_t k = 1; k < rows.size(); ++k) inc = inc && rows[k][ct] > rows[k - 1][ct];
                expect(inc, f.name + " times strictly increase");
            }
            if (f.name == "background_series.csv") {
                const std::size_t c = column(header, "theta_inf");
                bool pos = true;
                for (const auto& row : rows) pos = pos && row[c] > 0.0;
                expect(pos, "theta_inf stays positive");
            }
            if (f.name == "macro_series.csv") {
                const std::size_t cR = column(header, "R");
                const std::size_t cth = column(header, "theta");
                bool ok = true, pos = true;
                for (const auto& row : rows) {
                    ok = ok && row[cR] >= 0.0 && row[cR] <= 1.0 + 1e-12;
                    pos = pos && row[cth] > 0.0;
                }
                expect(ok, "order parameter lies in [0, 1]");
                expect(pos, "macro theta stays positive");
            }
            if (f.name == "macro_snapshots.csv") {
                std::map<double, std::pair<double, std::size_t>> mass;
                bool nonneg = true;
                for (const auto& row : rows) {
                    auto& e = mass[row[0]];
                    e.first += row[2];
                    e.second += 1;
                    nonneg = nonneg && row[2] >= 0.0;
                }
                bool unit = true;
                for (const auto& [t, e] : mass) unit = unit && std::abs(e.first / static_cast<double>(e.second) - 1.0) < 1e-10;
                expect(nonneg, "snapshot densities are non-negative");
                expect(unit, "snapshot densities have unit mass");
            }
            if (f.name == "kinetic_series.csv") {
                const std::size_t lo = column(header, "theta_min"), hi = column(header, "theta_max"),
                                  mean = column(header, "theta_mean");
                bool ok = true;
                for (const auto& row : rows) ok = ok && row[lo] > 0.0 && row[lo] <= row[mean] + 1e-12 && row[mean] <= row[hi] + 1e-12;
                expect(ok, "kinetic theta range is positive and brackets the mean");
            }
            if (f.name == "particle_series.csv" && !rows.empty()) {
                const std::size_t sv = column(header, "sum_v"), st = column(header, "sum_theta");
                double dv = 0.0, dt = 0.0;
                for (const auto& row : rows) {
                    dv = std::max(dv, std::abs(row[sv] - rows[0][sv]) / std::max(1.0, std::abs(rows[0][sv])));
                    dt = std::max(dt, std::abs(row[st] - rows[0][st]) / std::abs(rows[0][st]));
                }
                expect(dv < 1e-8 && dt < 1e-8, "particle momentum and theta sums are conserved to 1e-8");
            }
        } catch (const Error& e) {
            expect(false, f.name + ": " + e.what());
        }
    }
    return r;
}

}  // namespace tcs

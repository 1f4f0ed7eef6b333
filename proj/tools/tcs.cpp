#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcs/config.hpp"
#include "tcs/errors.hpp"
#include "tcs/runner.hpp"

namespace {

int report(const tcs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermomechanical Cucker-Smale simulation suite"};
    app.set_version_flag("--version", tcs::version_string());
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a config file");
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

    std::string sweep_path;
    std::vector<double> eps;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an epsilon sweep with the settings of a config file");
    sweep_cmd->add_option("config", sweep_path, "Config file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--eps", eps, "Comma-separated epsilons")->delimiter(',');

    std::string manifest_path;
    auto* check_cmd = app.add_subcommand("check", "Re-verify the outputs listed in a run manifest");
    check_cmd->add_option("manifest", manifest_path, "manifest.json of a finished run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) {
            const tcs::ExperimentConfig c = tcs::load_config(config_path);
            tcs::run(c, std::cout);
            return 0;
        }
        if (*sweep_cmd) {
            tcs::ExperimentConfig c = tcs::load_config(sweep_path);
            c.scenario = tcs::Scenario::epsilon_sweep;
            if (!eps.empty()) c.sweep_eps = eps;
            tcs::validate(c);
            tcs::run(c, std::cout);
            return 0;
        }
        const tcs::CheckReport r = tcs::check_manifest(manifest_path);
        for (const std::string& s : r.passed) std::cout << "ok    " << s << '\n';
        for (const std::string& s : r.failed) std::cout << "FAIL  " << s << '\n';
        return r.ok() ? 0 : 4;
    } catch (const tcs::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

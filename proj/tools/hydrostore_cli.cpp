#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hydrostore/driver.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kSolverFailure = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hydrostore: thermo-phase-pressure storage model driver"};
    std::string config;
    std::string out_dir;
    std::string mode;
    std::string command;
    std::vector<std::string> overrides;

    app.add_option("command", command, "run | steady-check | decay-study | convergence-study")
        ->check(CLI::IsMember({"run", "steady-check", "decay-study", "convergence-study"}));
    app.add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (default: run.out_dir)");
    app.add_option("--override", overrides, "key=value applied after the file; repeatable")
        ->allow_extra_args(false);
    app.add_option("--mode", mode, "same as the positional command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    if (!command.empty() && !mode.empty() && command != mode) {
        std::cerr << "error: command '" << command << "' conflicts with --mode " << mode << '\n';
        return kInvalid;
    }
    if (!command.empty()) mode = command;
    if (!mode.empty()) overrides.push_back("run.mode=" + mode);

    try {
        const hydrostore::Scenario scenario = hydrostore::load_scenario(config, overrides);
        const std::filesystem::path out = out_dir.empty() ? scenario.out_dir : std::filesystem::path(out_dir);
        const hydrostore::ModeSummary summary = hydrostore::execute(scenario, out);
        for (const auto& [k, v] : summary.values) std::cout << k << " = " << v << '\n';
        for (const auto& f : summary.files) std::cout << "wrote " << f.string() << '\n';
        return kOk;
    } catch (const hydrostore::ScenarioFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\ndump: " << e.dump_path().string() << '\n';
        return kSolverFailure;
    } catch (const hydrostore::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInvalid;
    } catch (const hydrostore::ValidationError& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kInvalid;
    } catch (const hydrostore::DomainError& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kInvalid;
    } catch (const hydrostore::Error& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    }
}

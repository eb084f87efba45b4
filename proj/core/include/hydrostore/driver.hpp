#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hydrostore/diagnostics.hpp"
#include "hydrostore/errors.hpp"
#include "hydrostore/scenario.hpp"
#include "hydrostore/stepper.hpp"

namespace hydrostore {

/// A run aborted by the solver; the last accepted state was dumped to `dump_path`.
class ScenarioFailure : public Error {
public:
    ScenarioFailure(const std::string& what, std::filesystem::path dump)
        : Error(what), dump_path_(std::move(dump)) {}
    const std::filesystem::path& dump_path() const noexcept { return dump_path_; }

private:
    std::filesystem::path dump_path_;
};

/// Human-readable key/value summary of a mode plus the files it wrote.
struct ModeSummary {
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<std::filesystem::path> files;
};

/// Runs a scenario with diagnostics attached; the trajectory keeps every
/// `output_every`-th state.
struct MonitoredRun {
    Trajectory trajectory;
    std::vector<DiagnosticsRecord> records;
};
MonitoredRun run_monitored(const Scenario& scenario, int output_every);

/// sqrt(||d chi||^2 + ||d theta||^2 + ||d u||^2) in the weighted L2 norm.
double state_distance(const State& a, const State& b);

/// Discrete L2(Q) distance of two trajectories stored at every step.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

struct OrderStudy {
    std::vector<double> parameters;   ///< dt or cell count per level
    std::vector<double> differences;  ///< distance between consecutive levels
    std::vector<double> orders;       ///< log2 ratio of consecutive differences
};

/// Runs the scenario with dt, dt/2, ..., dt/2^(levels-1) and compares final states.
OrderStudy temporal_order_study(const Scenario& scenario, int levels);
/// Same with the cell count doubled per level, compared on the coarse nodes.
OrderStudy spatial_order_study(const Scenario& scenario, int levels);
/// L2(Q) distances between runs at consecutive nu values.
std::vector<double> nu_sweep_distances(const Scenario& scenario, const std::vector<double>& nus);

/// Executes scenario.mode, writing CSV output below `out_dir`.
ModeSummary execute(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace hydrostore

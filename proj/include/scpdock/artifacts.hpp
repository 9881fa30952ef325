#pragma once

#include "scpdock/config.hpp"
#include "scpdock/ptr.hpp"
#include "scpdock/verify.hpp"

#include <stdexcept>
#include <string>

namespace scpdock {

/// Version stamped into every JSON artifact and the run manifest.
inline constexpr int kArtifactSchemaVersion = 1;

/// Run directory layout:
///   config.yaml       resolved configuration (reloadable)
///   scenario.json     resolved scenario, including the derived terminal state
///   run.json          manifest: status, counts, fuel figures
///   trajectory.csv    node states
///   dense.csv         nonlinear re-simulation of the schedule
///   schedule.csv      pulses per node and thruster
///   iterations.json   per-iteration log
///   verification.json written by `verify`
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_run_artifacts(const std::string& dir, const RunConfig& cfg, const SolveOutput& out);
void write_verification(const std::string& dir, const VerifyReport& report, const VerifyTolerances& tol);

struct LoadedRun {
    RunConfig cfg;
    Trajectory traj;
};

/// Reads config.yaml, trajectory.csv and schedule.csv. Throws ArtifactError
/// naming the first missing or malformed file.
LoadedRun load_run(const std::string& dir);

/// Writers used by the run directory, exposed for tools and tests.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_schedule_csv(const std::string& path, const Trajectory& traj, const VehicleModel& vehicle);
std::string iterations_json(const std::vector<IterationRecord>& log);
std::string verification_json(const VerifyReport& report, const VerifyTolerances& tol);

/// Gate values over a grid of normalized predicates at every schedule value
/// of beta: shifted and unshifted logit OR gate, RASHS, CSC. One predicate.
std::string smoothing_comparison_csv(const HomotopyParams& homotopy, int grid_points);

}  // namespace scpdock

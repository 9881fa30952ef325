#pragma once

#include "scpdock/dynamics.hpp"
#include "scpdock/rendezvous.hpp"

#include <string>
#include <vector>

namespace scpdock {

/// Nonlinear re-simulation of a pulse schedule from a given initial state.
struct Simulation {
    std::vector<ChaserState> nodes;  // pre-impulse state at every node, N_c + 1 entries
    std::vector<double> t;           // dense sample times
    std::vector<int> segment;        // segment index of each dense sample
    std::vector<ChaserState> x;      // dense samples, post-impulse at each segment start
};

/// Applies the pulses at nodes 0..N_c-1 and coasts between nodes, recording
/// `samples` intervals per segment.
Simulation simulate(const ChaserState& x0, const PulseSchedule& schedule, double tf, const VehicleModel& vehicle,
                    const OrbitModel& orbit, int samples);

struct VerifyTolerances {
    double mib = 1e-3;            // s
    double plume_pulse = 1e-3;    // s
    double shell = 0.5;           // m, excluded band inside each sphere
    double cone_angle = 0.5;      // deg
    double node_position = 0.1;   // m
    double node_velocity = 0.01;  // m/s
    double node_attitude = 0.5;   // deg
    int samples = 10;             // dense samples per segment
};

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double worst = 0.0;      // worst value of the checked quantity
    double tolerance = 0.0;  // pass when worst <= tolerance
    std::string unit;
    std::string where;       // location of the worst case
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool passed() const;
    const VerifyCheck* find(const std::string& name) const;
};

/// Checks a trajectory against the exact discrete logic. Uses only the
/// dynamics and the unsmoothed constraint definitions.
VerifyReport verify_trajectory(const ScenarioConfig& scenario, const Trajectory& traj,
                               const VerifyTolerances& tol = {});

}  // namespace scpdock

#pragma once

#include "scpdock/conic_program.hpp"
#include "scpdock/continuation.hpp"
#include "scpdock/dynamics.hpp"
#include "scpdock/rendezvous.hpp"

#include <string>
#include <vector>

namespace scpdock {

/// Affine scaling of the decision variables: physical = scale * scaled.
struct ScalingConfig {
    double position = 100.0;   // m
    double velocity = 1.0;     // m/s
    double quaternion = 1.0;
    double rate = 0.1;         // rad/s
    double time = 0.0;         // s; zero selects tf_max - tf_min
};

struct PtrConfig {
    double w_vc = 1e4;
    double w_tr = 100.0;
    double eps_stop = 1e-3;
    double vc_tol = 1e-6;
    int max_iters = 60;
    bool embedded = true;         // false selects the non-embedded driver
    int max_rejections = 3;
    double rejection_inflation = 10.0;
    ScalingConfig scaling;
    SolverOptions solver;
    PropagationOptions propagation;

    void validate(int n_updates) const;
};

/// Per-segment affine map x_{k+1} = A x_k + B dt_k + S t_f + c.
struct SegmentLinearization {
    StateMat A;
    Eigen::Matrix<double, kStateDim, Eigen::Dynamic> B;
    StateVec S;
    StateVec c;
    StateVec x_end;  // nonlinear propagation of the reference segment
};

/// Throws DivergenceError when a reference segment cannot be propagated.
std::vector<SegmentLinearization> discretize(const Trajectory& ref, const ScenarioConfig& scenario,
                                             const PropagationOptions& opts = {});

/// Column offsets of every variable group in the subproblem.
struct VariableLayout {
    int n_nodes = 0;   // N_c
    int n_rcs = 0;
    int n_forward = 0;

    int x = 0;        // (N_c + 1) x 13 node states
    int dt = 0;       // n_rcs x N_c obtained pulses, index i + n_rcs k
    int dt_ref = 0;   // n_rcs x N_c reference pulses
    int tf = 0;
    int dpf = 0, dvf = 0, dwf = 0;
    int nu_pos = 0, nu_neg = 0;    // 13 N_c each
    int mib_pos = 0, mib_neg = 0;  // n_rcs N_c each
    int wall = 0;                  // n_rcs N_c
    int plume = 0;                 // n_forward N_c
    int appch = 0;                 // N_c (nodes 1..N_c)
    int eq = 0;                    // n_rcs N_c one-norm epigraph
    int eta = 0;                   // N_c + 1 trust-region epigraphs
    int eta_tf = 0;
    int total = 0;

    static VariableLayout build(int n_nodes, int n_rcs, int n_forward);
    int state(int k, int j) const { return x + kStateDim * k + j; }
    int pulse(int i, int k) const { return dt + i + n_rcs * k; }
    int pulse_ref(int i, int k) const { return dt_ref + i + n_rcs * k; }
};

struct Subproblem {
    ConicProgram program;
    VariableLayout layout;
    std::vector<int> forward;  // thruster indices subject to the plume constraint
};

Subproblem build_subproblem(const Trajectory& ref, const std::vector<SegmentLinearization>& disc, double beta,
                            const ScenarioConfig& scenario, const PtrConfig& cfg, double w_tr);

struct IterationRecord {
    int iteration = 0;
    int updates = 0;         // L after this iteration's homotopy update
    double beta = 0.0;
    bool beta_updated = false;
    double cost = 0.0;       // J_l, subproblem optimum
    double fuel = 0.0;       // J_fuel of the new iterate
    double eq = 0.0;         // J_eq of the new iterate
    double trust_region = 0.0;  // sum of scaled squared deviations
    double vc_norm = 0.0;       // |nu|_1, scaled
    double buffer_norm = 0.0;   // sum of virtual buffers, scaled
    double max_deviation = 0.0; // max scaled change from the reference
    double tf = 0.0;
    std::string status;
    int solver_iterations = 0;
    int rejections = 0;
    double solve_time = 0.0;  // s, conic solver only
    double wall_time = 0.0;   // s, whole iteration
};

struct StepResult {
    Trajectory traj;
    IterationRecord record;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& msg, SolverStatus status) : std::runtime_error(msg), status(status) {}
    SolverStatus status;
};

/// One PTR iteration around `ref`. Retries with an inflated trust-region
/// weight when the solve fails or the new reference cannot be propagated.
StepResult ptr_step(const Trajectory& ref, double beta, const ScenarioConfig& scenario, const PtrConfig& cfg);

/// Max absolute difference between two iterates in scaled units.
double scaled_deviation(const Trajectory& a, const Trajectory& b, const ScenarioConfig& scenario,
                        const PtrConfig& cfg);

struct SolveOutput {
    Trajectory traj;
    std::vector<IterationRecord> log;
    bool converged = false;
    int updates = 0;
    std::string message;
};

SolveOutput solve_rendezvous(const ScenarioConfig& scenario, const HomotopyParams& homotopy, const PtrConfig& cfg);
SolveOutput solve_rendezvous(const ScenarioConfig& scenario, const HomotopyParams& homotopy, const PtrConfig& cfg,
                             const Trajectory& guess);

}  // namespace scpdock

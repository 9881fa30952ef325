#pragma once

#include "scpdock/dynamics.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace scpdock {

struct ScenarioConfig {
    VehicleModel vehicle;
    OrbitModel orbit;
    double orbit_altitude = 400e3;  // m, informational once orbit is set

    double r_plume = 20.0;    // m
    double r_appch = 30.0;    // m
    double theta_appch = 0.0; // rad

    ChaserState x0;
    ChaserState xf;  // p and q are derived from the docking geometry

    Quaternion q_lock;  // docked chaser port relative to target port
    Quaternion q_dp;    // chaser docking port attitude, body frame
    Vec3 p_dp = Vec3::Zero();  // chaser docking port position, body frame

    double tol_pf = 0.1;    // m
    double tol_vf = 0.01;   // m/s
    double tol_qf = 0.0;    // rad
    double tol_wf = 0.0;    // rad/s

    double tf_min = 100.0;  // s
    double tf_max = 1000.0; // s
    int n_nodes = 50;       // control opportunities N_c
    double w_eq = 1.0;

    // Predicate normalizations of the approach and plume gates, m^2.
    double appch_gmax = 0.0;
    double plume_gmax = 0.0;

    double tf_guess() const { return 0.5 * (tf_min + tf_max); }
    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
    /// Recomputes xf.p and xf.q from the docking geometry.
    void apply_terminal_pose();
};

/// Sixteen thrusters in four quads on a 2.1 m ring in the body y-z plane.
std::vector<Thruster> default_thrusters();

ScenarioConfig default_apollo_scenario();

/// Terminal attitude and position for the given docking geometry:
/// q_f = q_lock ⊗ q_dp*, p_f = -R(q_f) p_dp.
std::pair<Quaternion, Vec3> terminal_pose(const Quaternion& q_lock, const Quaternion& q_dp, const Vec3& p_dp);

/// Pulse durations, n_rcs x N_c, seconds.
struct PulseSchedule {
    Eigen::MatrixXd dt;
    Eigen::MatrixXd dt_ref;

    static PulseSchedule zeros(int n_rcs, int n_nodes)
    {
        return {Eigen::MatrixXd::Zero(n_rcs, n_nodes), Eigen::MatrixXd::Zero(n_rcs, n_nodes)};
    }
};

struct TerminalRelaxation {
    Vec3 dp = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
    Eigen::Vector4d dq = Eigen::Vector4d::Zero();
    Vec3 dw = Vec3::Zero();
};

/// Node states (pre-impulse) at t_k = k t_f / N_c, k = 0..N_c, with pulses
/// applied at nodes 0..N_c-1.
struct Trajectory {
    std::vector<ChaserState> states;
    PulseSchedule schedule;
    double tf = 0.0;
    TerminalRelaxation relax;

    int n_nodes() const { return static_cast<int>(schedule.dt.cols()); }
    double node_spacing() const { return tf / n_nodes(); }
};

double fuel_cost(const PulseSchedule& schedule, double dt_max);
double eq_regularization(const PulseSchedule& schedule, double w_eq, double dt_min);

struct ScalarWithGrad {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

/// Smoothed approach-sphere gate value at p (1 outside, 0 inside).
ScalarWithGrad approach_gate(const Vec3& p, double beta, const ScenarioConfig& cfg);
/// Smoothed plume-sphere gate value at p.
ScalarWithGrad plume_gate(const Vec3& p, double beta, const ScenarioConfig& cfg);

/// cos θ - (1 + cos θ) R(p) - e_x'p/|p|, feasible when <= 0. Gradient in p.
/// Throws std::domain_error when |p| < 1e-6 m.
ScalarWithGrad approach_cone_constraint(const Vec3& p, double beta, const ScenarioConfig& cfg);

/// dt - R_plume(p) dt_max, feasible when <= 0. Gradient in p; d/d(dt) = 1.
ScalarWithGrad plume_constraint(const Vec3& p, double dt, double beta, const ScenarioConfig& cfg);

struct SdcEval {
    double dt = 0.0;           // obtained pulse
    double slope = 0.0;        // d dt / d dt_ref
    double slope_deriv = 0.0;  // d slope / d dt_ref
    double gate = 0.0;         // R_mib(dt_ref)
};

/// Smooth deadband curve: dt = R_mib(dt_ref) dt_ref.
SdcEval mib_sdc(double dt_ref, double beta, const VehicleModel& vehicle);

/// SDC slope at dt_min + pulse_buffer.
double wall_threshold(double beta, const VehicleModel& vehicle);

/// slope(dt_ref) - G_db, feasible when <= 0. `deriv` receives the slope
/// derivative when non-null.
double wall_avoidance(double dt_ref, double beta, const VehicleModel& vehicle, double* deriv = nullptr);

struct BoundaryReport {
    double initial = 0.0;        // max |x_0 - x0|
    double terminal_eq = 0.0;    // max |x_N + Δx - x_f| over p, v, w blocks
    double dp_box = 0.0;         // max(|Δp|∞ - tol, |Δp_x|)
    double dv_box = 0.0;
    double dw_box = 0.0;
    double attitude = 0.0;       // cos(tol/2) - q_N'q_f (hemisphere-aligned)

    double worst() const;
};

BoundaryReport boundary_constraints(const ChaserState& x_first, const ChaserState& x_last,
                                    const TerminalRelaxation& relax, const ScenarioConfig& cfg);

/// Terminal attitude flipped into the hemisphere of `reference`.
Quaternion aligned_terminal_attitude(const Quaternion& qf, const Quaternion& reference);

Trajectory initial_guess(const ScenarioConfig& cfg);

}  // namespace scpdock

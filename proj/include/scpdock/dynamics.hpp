#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace scpdock {

inline constexpr int kStateDim = 13;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

// Offsets of the blocks inside the stacked state [p; v; q; w].
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kQuat = 6;
inline constexpr int kRate = 10;

/// Hamilton quaternion stored scalar-last: (x, y, z, w).
///
/// The quaternion maps body-frame vectors into the LVLH frame through
/// q ⊗ v ⊗ q*. The identity is (0, 0, 0, 1).
struct Quaternion {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 1.0;

    static Quaternion identity() { return {}; }
    static Quaternion from_axis_angle(const Vec3& axis, double angle);
    static Quaternion from_vector(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }

    Eigen::Vector4d vector() const { return {x, y, z, w}; }
    Vec3 vec() const { return {x, y, z}; }
    double norm() const;
    Quaternion normalized() const;
    Quaternion conjugate() const { return {-x, -y, -z, w}; }
    double dot(const Quaternion& o) const { return x * o.x + y * o.y + z * o.z + w * o.w; }
    Quaternion operator-() const { return {-x, -y, -z, -w}; }

    /// Rotation matrix R with R u = q ⊗ u ⊗ q* (exact for any q, scales by |q|²).
    Mat3 rotation_matrix() const;
};

Quaternion quat_mul(const Quaternion& a, const Quaternion& b);
Vec3 quat_rotate(const Quaternion& q, const Vec3& u);
/// Shortest-arc spherical interpolation; t in [0, 1].
Quaternion slerp(const Quaternion& a, const Quaternion& b, double t);
/// Rotation angle (rad) between two attitudes, sign-agnostic.
double attitude_error(const Quaternion& a, const Quaternion& b);

struct ChaserState {
    Vec3 p = Vec3::Zero();  // m, LVLH
    Vec3 v = Vec3::Zero();  // m/s, LVLH
    Quaternion q;           // body -> LVLH
    Vec3 w = Vec3::Zero();  // rad/s, body

    StateVec vector() const;
    static ChaserState from_vector(const StateVec& x);
};

struct Thruster {
    Vec3 position = Vec3::Zero();   // m, body frame
    Vec3 direction = Vec3::UnitX(); // unit thrust direction, body frame
    bool forward_facing = false;
};

struct VehicleModel {
    double mass = 1.0;              // kg
    Mat3 inertia = Mat3::Identity(); // kg m^2
    std::vector<Thruster> thrusters;
    double thrust = 1.0;            // N
    double pulse_min = 0.1;         // s
    double pulse_max = 1.0;         // s
    double pulse_buffer = 0.01;     // s

    int thruster_count() const { return static_cast<int>(thrusters.size()); }
    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

struct OrbitModel {
    double mean_motion = 0.0;  // rad/s

    /// Circular orbit at the given altitude above a spherical Earth.
    static OrbitModel circular(double altitude_m,
                               double mu = 3.986004418e14,
                               double body_radius = 6.378137e6);
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Vec3 lvlh_accel(const Vec3& p, const Vec3& v, const OrbitModel& orbit);

StateVec coast_derivative(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit);
StateVec coast_derivative(const ChaserState& x, const VehicleModel& vehicle, const OrbitModel& orbit);

/// Analytic Jacobian of coast_derivative with respect to the stacked state.
StateMat coast_jacobian(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit);

/// Central-difference Jacobian of coast_derivative; used as a fallback and
/// as a cross-check of the analytic form.
StateMat coast_jacobian_fd(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit,
                           double step = 1e-7);

ChaserState impulse_jump(const ChaserState& x, std::span<const double> pulses, const VehicleModel& vehicle);

struct JumpJacobians {
    StateMat d_state;                                    // 13 x 13
    Eigen::Matrix<double, kStateDim, Eigen::Dynamic> d_pulses; // 13 x n_rcs
};

JumpJacobians linearize_jump(const ChaserState& x, std::span<const double> pulses, const VehicleModel& vehicle);

struct PropagationOptions {
    /// Upper bound on the RK4 substep. Zero selects dt / 20.
    double max_step = 0.0;
};

/// Fixed-step RK4 coast propagation. The quaternion norm is held at its
/// initial value after every substep.
ChaserState propagate_coast(const ChaserState& x, double dt, const VehicleModel& vehicle,
                            const OrbitModel& orbit, const PropagationOptions& opts = {});

/// Coast propagation returning the state at `samples + 1` evenly spaced times
/// over [0, dt], both ends included.
std::vector<ChaserState> propagate_coast_samples(const ChaserState& x, double dt, int samples,
                                                 const VehicleModel& vehicle, const OrbitModel& orbit,
                                                 const PropagationOptions& opts = {});

struct CoastLinearization {
    StateMat stm = StateMat::Identity();  // d x(dt) / d x(0)
    StateVec defect = StateVec::Zero();   // x(dt) - stm * x(0) along the reference
    StateVec final_state = StateVec::Zero();
    StateVec final_derivative = StateVec::Zero();  // f(x(dt)), sensitivity to dt
};

/// Integrates the variational equation alongside the reference coast arc
/// starting at `x0` with duration `dt`.
CoastLinearization linearize_coast_segment(const ChaserState& x0, double dt, const VehicleModel& vehicle,
                                           const OrbitModel& orbit, const PropagationOptions& opts = {});

}  // namespace scpdock

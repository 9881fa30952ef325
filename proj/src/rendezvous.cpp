#include "scpdock/rendezvous.hpp"

#include "scpdock/smooth_logic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scpdock {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

// Sphere gate on g = |p|^2 - r^2 with the anchor at the initial position.
ScalarWithGrad sphere_gate(const Vec3& p, double r, double gmax, const Vec3& anchor, double beta)
{
    const double g = p.squaredNorm() - r * r;
    const double gc = anchor.squaredNorm() - r * r;
    const ScalarGateEval e = or_gate_scalar(g, gmax, gc, beta);
    return {e.value, 2.0 * e.d1 * p};
}

}  // namespace

void ScenarioConfig::validate() const
{
    vehicle.validate();
    require(r_plume > 0.0 && r_plume < r_appch, "scenario requires 0 < r_plume < r_appch");
    require(theta_appch > 0.0 && theta_appch < 0.5 * std::numbers::pi, "approach cone angle must lie in (0, pi/2)");
    require(tf_min > 0.0 && tf_min <= tf_max, "final time bounds must satisfy 0 < tf_min <= tf_max");
    require(n_nodes >= 2, "node count must be at least 2");
    require(tol_pf > 0.0 && tol_vf > 0.0 && tol_qf > 0.0 && tol_wf > 0.0, "terminal tolerances must be positive");
    require(w_eq > 0.0, "equality regularization weight must be positive");
    require(appch_gmax > 0.0 && plume_gmax > 0.0, "gate normalizations must be positive");
    require(orbit.mean_motion >= 0.0, "orbit mean motion must be non-negative");
    require(x0.p.squaredNorm() > r_appch * r_appch, "initial position must lie outside the approach sphere");
    require(std::abs(x0.q.norm() - 1.0) < 1e-9, "initial attitude must be a unit quaternion");
}

void ScenarioConfig::apply_terminal_pose()
{
    const auto [q, p] = terminal_pose(q_lock, q_dp, p_dp);
    xf.q = q;
    xf.p = p;
}

std::vector<Thruster> default_thrusters()
{
    constexpr double ring = 2.1;
    constexpr double axial = 0.3;
    std::vector<Thruster> out;
    for (int quad = 0; quad < 4; ++quad) {
        const double phi = quad * 0.5 * std::numbers::pi;
        const double c = std::round(std::cos(phi));
        const double s = std::round(std::sin(phi));
        const Vec3 ring_pos(0.0, ring * c, ring * s);
        const Vec3 tangent(0.0, -s, c);
        out.push_back({ring_pos + Vec3(-axial, 0, 0), Vec3::UnitX(), false});
        // Pushes the vehicle aft; its plume leaves along +x_B.
        out.push_back({ring_pos + Vec3(axial, 0, 0), -Vec3::UnitX(), true});
        out.push_back({ring_pos, tangent, false});
        out.push_back({ring_pos, -tangent, false});
    }
    return out;
}

std::pair<Quaternion, Vec3> terminal_pose(const Quaternion& q_lock, const Quaternion& q_dp, const Vec3& p_dp)
{
    const Quaternion qf = quat_mul(q_lock, q_dp.conjugate());
    return {qf, -quat_rotate(qf, p_dp)};
}

ScenarioConfig default_apollo_scenario()
{
    ScenarioConfig cfg;
    VehicleModel& v = cfg.vehicle;
    v.mass = 30323.0;
    v.inertia << 49249.0, 2862.0, -370.0,
                 2862.0, 108514.0, -3075.0,
                 -370.0, -3075.0, 110772.0;
    v.thrust = 445.0;
    v.pulse_min = 0.112;
    v.pulse_max = 1.0;
    v.pulse_buffer = 0.0112;
    v.thrusters = default_thrusters();

    cfg.orbit_altitude = 400e3;
    cfg.orbit = OrbitModel::circular(cfg.orbit_altitude);
    cfg.r_plume = 20.0;
    cfg.r_appch = 30.0;
    cfg.theta_appch = 10.0 * kDeg;

    cfg.x0.p = Vec3(100.0, 20.0, -20.0);
    cfg.xf.v = Vec3(-0.1, 0.0, 0.0);

    // Yaw of 180 deg between the docked chaser and target ports.
    cfg.q_lock = Quaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi);
    // Port calibrated so the terminal pose lands on (4.48, -0.05, 0.17) m
    // with a 30 deg roll; see tools/calibrate_docking_port.py.
    cfg.q_dp = Quaternion::from_axis_angle(Vec3::UnitX(), -30.0 * kDeg);
    const double c30 = std::cos(30.0 * kDeg);
    const double s30 = std::sin(30.0 * kDeg);
    cfg.p_dp = Vec3(4.48, -0.05 * c30 - 0.17 * s30, 0.05 * s30 - 0.17 * c30);
    cfg.apply_terminal_pose();

    cfg.tol_pf = 0.1;
    cfg.tol_vf = 0.01;
    cfg.tol_qf = 1.0 * kDeg;
    cfg.tol_wf = 0.01 * kDeg;
    cfg.tf_min = 100.0;
    cfg.tf_max = 1000.0;
    cfg.n_nodes = 50;
    cfg.w_eq = 1.0;
    cfg.appch_gmax = cfg.r_appch * cfg.r_appch;
    cfg.plume_gmax = cfg.r_plume * cfg.r_plume;
    return cfg;
}

double fuel_cost(const PulseSchedule& schedule, double dt_max)
{
    return schedule.dt.sum() / dt_max;
}

double eq_regularization(const PulseSchedule& schedule, double w_eq, double dt_min)
{
    return w_eq / dt_min * (schedule.dt - schedule.dt_ref).cwiseAbs().sum();
}

ScalarWithGrad approach_gate(const Vec3& p, double beta, const ScenarioConfig& cfg)
{
    return sphere_gate(p, cfg.r_appch, cfg.appch_gmax, cfg.x0.p, beta);
}

ScalarWithGrad plume_gate(const Vec3& p, double beta, const ScenarioConfig& cfg)
{
    return sphere_gate(p, cfg.r_plume, cfg.plume_gmax, cfg.x0.p, beta);
}

ScalarWithGrad approach_cone_constraint(const Vec3& p, double beta, const ScenarioConfig& cfg)
{
    const double r = p.norm();
    if (r < 1e-6) {
        throw std::domain_error("approach cone direction is undefined at the origin");
    }
    const double ct = std::cos(cfg.theta_appch);
    const ScalarWithGrad gate = approach_gate(p, beta, cfg);
    ScalarWithGrad out;
    out.value = ct - (1.0 + ct) * gate.value - p.x() / r;
    out.grad = -(1.0 + ct) * gate.grad - (Vec3::UnitX() / r - p.x() * p / (r * r * r));
    return out;
}

ScalarWithGrad plume_constraint(const Vec3& p, double dt, double beta, const ScenarioConfig& cfg)
{
    const ScalarWithGrad gate = plume_gate(p, beta, cfg);
    const double dt_max = cfg.vehicle.pulse_max;
    return {dt - gate.value * dt_max, -dt_max * gate.grad};
}

SdcEval mib_sdc(double dt_ref, double beta, const VehicleModel& vehicle)
{
    const double gmax = vehicle.pulse_max - vehicle.pulse_min;
    const ScalarGateEval e = or_gate_scalar(dt_ref - vehicle.pulse_min, gmax, gmax, beta);
    SdcEval out;
    out.gate = e.value;
    out.dt = e.value * dt_ref;
    out.slope = e.d1 * dt_ref + e.value;
    out.slope_deriv = e.d2 * dt_ref + 2.0 * e.d1;
    return out;
}

double wall_threshold(double beta, const VehicleModel& vehicle)
{
    return mib_sdc(vehicle.pulse_min + vehicle.pulse_buffer, beta, vehicle).slope;
}

double wall_avoidance(double dt_ref, double beta, const VehicleModel& vehicle, double* deriv)
{
    const SdcEval e = mib_sdc(dt_ref, beta, vehicle);
    if (deriv != nullptr) {
        *deriv = e.slope_deriv;
    }
    return e.slope - wall_threshold(beta, vehicle);
}

double BoundaryReport::worst() const
{
    return std::max({initial, terminal_eq, dp_box, dv_box, dw_box, attitude});
}

Quaternion aligned_terminal_attitude(const Quaternion& qf, const Quaternion& reference)
{
    return qf.dot(reference) < 0.0 ? -qf : qf;
}

BoundaryReport boundary_constraints(const ChaserState& x_first, const ChaserState& x_last,
                                    const TerminalRelaxation& relax, const ScenarioConfig& cfg)
{
    BoundaryReport r;
    r.initial = (x_first.vector() - cfg.x0.vector()).cwiseAbs().maxCoeff();
    const Vec3 ep = x_last.p + relax.dp - cfg.xf.p;
    const Vec3 ev = x_last.v + relax.dv - cfg.xf.v;
    const Vec3 ew = x_last.w + relax.dw - cfg.xf.w;
    r.terminal_eq = std::max({ep.cwiseAbs().maxCoeff(), ev.cwiseAbs().maxCoeff(), ew.cwiseAbs().maxCoeff()});
    r.dp_box = std::max(relax.dp.cwiseAbs().maxCoeff() - cfg.tol_pf, std::abs(relax.dp.x()));
    r.dv_box = relax.dv.cwiseAbs().maxCoeff() - cfg.tol_vf;
    r.dw_box = relax.dw.cwiseAbs().maxCoeff() - cfg.tol_wf;
    const Quaternion qf = aligned_terminal_attitude(cfg.xf.q, x_last.q);
    r.attitude = std::cos(0.5 * cfg.tol_qf) - x_last.q.dot(qf);
    return r;
}

Trajectory initial_guess(const ScenarioConfig& cfg)
{
    const int N = cfg.n_nodes;
    const int m = cfg.vehicle.thruster_count();
    Trajectory t;
    t.tf = cfg.tf_guess();
    t.schedule = PulseSchedule::zeros(m, N);
    const Vec3 v = (cfg.xf.p - cfg.x0.p) / t.tf;

    // Constant body rate carrying q0 to qf along the slerp path.
    const Quaternion qf = aligned_terminal_attitude(cfg.xf.q, cfg.x0.q);
    const Quaternion dq = quat_mul(cfg.x0.q.conjugate(), qf);
    const double vn = dq.vec().norm();
    Vec3 w = Vec3::Zero();
    if (vn > 1e-12) {
        w = (2.0 * std::atan2(vn, dq.w) / t.tf) * dq.vec() / vn;
    }

    t.states.resize(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
        const double s = static_cast<double>(k) / N;
        ChaserState& x = t.states[static_cast<std::size_t>(k)];
        x.p = (1.0 - s) * cfg.x0.p + s * cfg.xf.p;
        x.v = v;
        x.q = slerp(cfg.x0.q, qf, s);
        x.w = w;
    }
    return t;
}

}  // namespace scpdock

#include "scpdock/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scpdock {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string at_node(int k) { return "node " + std::to_string(k); }

std::string at_pulse(int i, int k) { return "thruster " + std::to_string(i) + " node " + std::to_string(k); }

VerifyCheck make(const std::string& name, double worst, double tol, const std::string& unit, std::string where)
{
    VerifyCheck c;
    c.name = name;
    c.worst = worst;
    c.tolerance = tol;
    c.unit = unit;
    c.where = std::move(where);
    c.passed = std::isfinite(worst) && worst <= tol;
    return c;
}

// Distance of a pulse from the admissible set {0} ∪ [dt_min, dt_max].
double mib_distance(double dt, const VehicleModel& v)
{
    const double to_zero = std::abs(dt);
    const double to_band = std::max({0.0, v.pulse_min - dt, dt - v.pulse_max});
    return std::min(to_zero, to_band);
}

}  // namespace

Simulation simulate(const ChaserState& x0, const PulseSchedule& schedule, double tf, const VehicleModel& vehicle,
                    const OrbitModel& orbit, int samples)
{
    const int N = static_cast<int>(schedule.dt.cols());
    if (N < 1 || schedule.dt.rows() != vehicle.thruster_count()) {
        throw std::invalid_argument("pulse schedule does not match the vehicle");
    }
    if (samples < 1) {
        throw std::invalid_argument("simulation needs at least one sample per segment");
    }
    const double tc = tf / N;
    Simulation sim;
    sim.nodes.reserve(static_cast<std::size_t>(N) + 1);
    sim.nodes.push_back(x0);
    ChaserState x = x0;
    std::vector<double> u(static_cast<std::size_t>(vehicle.thruster_count()));
    for (int k = 0; k < N; ++k) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = schedule.dt(static_cast<Eigen::Index>(i), k);
        }
        const ChaserState plus = impulse_jump(x, u, vehicle);
        const std::vector<ChaserState> arc = propagate_coast_samples(plus, tc, samples, vehicle, orbit);
        for (int s = 0; s <= samples; ++s) {
            sim.t.push_back(tc * (k + static_cast<double>(s) / samples));
            sim.segment.push_back(k);
            sim.x.push_back(arc[static_cast<std::size_t>(s)]);
        }
        x = arc.back();
        sim.nodes.push_back(x);
    }
    return sim;
}

bool VerifyReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

const VerifyCheck* VerifyReport::find(const std::string& name) const
{
    for (const VerifyCheck& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

VerifyReport verify_trajectory(const ScenarioConfig& sc, const Trajectory& traj, const VerifyTolerances& tol)
{
    const VehicleModel& veh = sc.vehicle;
    const int N = traj.n_nodes();
    if (static_cast<int>(traj.states.size()) != N + 1) {
        throw std::invalid_argument("trajectory needs N_c + 1 node states");
    }
    const Simulation sim = simulate(sc.x0, traj.schedule, traj.tf, veh, sc.orbit, tol.samples);
    VerifyReport rep;

    {
        double worst = 0.0;
        std::string where = "none";
        for (int k = 0; k < N; ++k) {
            for (int i = 0; i < veh.thruster_count(); ++i) {
                const double d = mib_distance(traj.schedule.dt(i, k), veh);
                if (d > worst) {
                    worst = d;
                    where = at_pulse(i, k) + " dt=" + std::to_string(traj.schedule.dt(i, k));
                }
            }
        }
        rep.checks.push_back(make("mib_membership", worst, tol.mib, "s", where));
    }

    {
        double worst = 0.0;
        std::string where = "none";
        for (int k = 0; k < N; ++k) {
            if (sim.nodes[static_cast<std::size_t>(k)].p.norm() > sc.r_plume - tol.shell) {
                continue;
            }
            for (int i = 0; i < veh.thruster_count(); ++i) {
                if (veh.thrusters[static_cast<std::size_t>(i)].forward_facing && traj.schedule.dt(i, k) > worst) {
                    worst = traj.schedule.dt(i, k);
                    where = at_pulse(i, k);
                }
            }
        }
        rep.checks.push_back(make("plume_impingement", worst, tol.plume_pulse, "s", where));
    }

    {
        // Angle beyond the cone half-angle, over dense samples well inside
        // the approach sphere.
        double worst = 0.0;
        std::string where = "none";
        for (std::size_t j = 0; j < sim.x.size(); ++j) {
            const Vec3& p = sim.x[j].p;
            const double r = p.norm();
            if (r > sc.r_appch - tol.shell || r < 1e-9) {
                continue;
            }
            const double angle = std::acos(std::clamp(p.x() / r, -1.0, 1.0));
            const double excess = (angle - sc.theta_appch) / kDeg;
            if (excess > worst) {
                worst = excess;
                where = "t=" + std::to_string(sim.t[j]) + " s";
            }
        }
        rep.checks.push_back(make("approach_cone", worst, tol.cone_angle, "deg", where));
    }

    const ChaserState& xN = sim.nodes.back();
    rep.checks.push_back(make("terminal_position", (xN.p - sc.xf.p).cwiseAbs().maxCoeff(), sc.tol_pf, "m", at_node(N)));
    rep.checks.push_back(make("terminal_velocity", (xN.v - sc.xf.v).cwiseAbs().maxCoeff(), sc.tol_vf, "m/s", at_node(N)));
    rep.checks.push_back(
        make("terminal_attitude", attitude_error(xN.q, sc.xf.q) / kDeg, sc.tol_qf / kDeg, "deg", at_node(N)));
    rep.checks.push_back(
        make("terminal_rate", (xN.w - sc.xf.w).cwiseAbs().maxCoeff() / kDeg, sc.tol_wf / kDeg, "deg/s", at_node(N)));

    {
        const double over = std::max({0.0, sc.tf_min - traj.tf, traj.tf - sc.tf_max});
        rep.checks.push_back(make("final_time_bounds", over, 0.0, "s", "tf=" + std::to_string(traj.tf)));
    }

    {
        double wp = 0.0, wv = 0.0, wq = 0.0;
        int kp = 0, kv = 0, kq = 0;
        for (int k = 0; k <= N; ++k) {
            const ChaserState& a = sim.nodes[static_cast<std::size_t>(k)];
            const ChaserState& b = traj.states[static_cast<std::size_t>(k)];
            const double dp = (a.p - b.p).norm();
            const double dv = (a.v - b.v).norm();
            const double dq = attitude_error(a.q, b.q) / kDeg;
            if (dp > wp) {
                wp = dp;
                kp = k;
            }
            if (dv > wv) {
                wv = dv;
                kv = k;
            }
            if (dq > wq) {
                wq = dq;
                kq = k;
            }
        }
        rep.checks.push_back(make("node_position_match", wp, tol.node_position, "m", at_node(kp)));
        rep.checks.push_back(make("node_velocity_match", wv, tol.node_velocity, "m/s", at_node(kv)));
        rep.checks.push_back(make("node_attitude_match", wq, tol.node_attitude, "deg", at_node(kq)));
    }
    return rep;
}

}  // namespace scpdock

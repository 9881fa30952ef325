#include "scpdock/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scpdock {

namespace {

Mat3 skew(const Vec3& a)
{
    Mat3 m;
    m << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return m;
}

int substep_count(double dt, const PropagationOptions& opts)
{
    if (dt <= 0.0) {
        return 0;
    }
    const double max_step = opts.max_step > 0.0 ? opts.max_step : dt / 20.0;
    return std::max(1, static_cast<int>(std::ceil(dt / max_step - 1e-12)));
}

void hold_quaternion_norm(StateVec& x, double target_norm)
{
    const double n = x.segment<4>(kQuat).norm();
    if (n > 0.0) {
        x.segment<4>(kQuat) *= target_norm / n;
    }
}

void check_finite(const StateVec& x)
{
    if (!x.allFinite()) {
        throw DivergenceError("coast propagation produced a non-finite state");
    }
}

}  // namespace

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle)
{
    const Vec3 u = axis.normalized();
    const double s = std::sin(0.5 * angle);
    return {u.x() * s, u.y() * s, u.z() * s, std::cos(0.5 * angle)};
}

double Quaternion::norm() const
{
    return std::sqrt(x * x + y * y + z * z + w * w);
}

Quaternion Quaternion::normalized() const
{
    const double n = norm();
    return {x / n, y / n, z / n, w / n};
}

Mat3 Quaternion::rotation_matrix() const
{
    const Vec3 v = vec();
    return (w * w - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() + 2.0 * w * skew(v);
}

Quaternion quat_mul(const Quaternion& a, const Quaternion& b)
{
    const Vec3 av = a.vec();
    const Vec3 bv = b.vec();
    const Vec3 v = a.w * bv + b.w * av + av.cross(bv);
    return {v.x(), v.y(), v.z(), a.w * b.w - av.dot(bv)};
}

Vec3 quat_rotate(const Quaternion& q, const Vec3& u)
{
    const Vec3 v = q.vec();
    return (q.w * q.w - v.squaredNorm()) * u + 2.0 * v.dot(u) * v + 2.0 * q.w * v.cross(u);
}

Quaternion slerp(const Quaternion& a, const Quaternion& b, double t)
{
    Quaternion bb = b;
    double c = a.dot(b);
    if (c < 0.0) {
        bb = -b;
        c = -c;
    }
    c = std::min(c, 1.0);
    const double theta = std::acos(c);
    if (theta < 1e-9) {
        const Eigen::Vector4d v = (1.0 - t) * a.vector() + t * bb.vector();
        return Quaternion::from_vector(v).normalized();
    }
    const double s = std::sin(theta);
    const Eigen::Vector4d v = (std::sin((1.0 - t) * theta) / s) * a.vector() + (std::sin(t * theta) / s) * bb.vector();
    return Quaternion::from_vector(v);
}

double attitude_error(const Quaternion& a, const Quaternion& b)
{
    const Quaternion d = quat_mul(a.conjugate(), b);
    return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w));
}

StateVec ChaserState::vector() const
{
    StateVec x;
    x.segment<3>(kPos) = p;
    x.segment<3>(kVel) = v;
    x.segment<4>(kQuat) = q.vector();
    x.segment<3>(kRate) = w;
    return x;
}

ChaserState ChaserState::from_vector(const StateVec& x)
{
    ChaserState s;
    s.p = x.segment<3>(kPos);
    s.v = x.segment<3>(kVel);
    s.q = Quaternion::from_vector(x.segment<4>(kQuat));
    s.w = x.segment<3>(kRate);
    return s;
}

void VehicleModel::validate() const
{
    if (!(mass > 0.0)) {
        throw std::invalid_argument("vehicle mass must be positive");
    }
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, inertia.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("inertia matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("inertia matrix must be positive definite");
    }
    if (!(thrust > 0.0)) {
        throw std::invalid_argument("thrust level must be positive");
    }
    if (!(pulse_min > 0.0 && pulse_min < pulse_max)) {
        throw std::invalid_argument("pulse bounds must satisfy 0 < pulse_min < pulse_max");
    }
    if (!(pulse_buffer > 0.0 && pulse_buffer < pulse_max - pulse_min)) {
        throw std::invalid_argument("pulse buffer must lie in (0, pulse_max - pulse_min)");
    }
    for (std::size_t i = 0; i < thrusters.size(); ++i) {
        if (std::abs(thrusters[i].direction.norm() - 1.0) > 1e-12) {
            throw std::invalid_argument("thruster " + std::to_string(i) + " direction is not a unit vector");
        }
    }
}

OrbitModel OrbitModel::circular(double altitude_m, double mu, double body_radius)
{
    const double a = body_radius + altitude_m;
    return {std::sqrt(mu / (a * a * a))};
}

Vec3 lvlh_accel(const Vec3& p, const Vec3& v, const OrbitModel& orbit)
{
    const double n = orbit.mean_motion;
    return {-2.0 * n * v.z(), -n * n * p.y(), 3.0 * n * n * p.z() + 2.0 * n * v.x()};
}

StateVec coast_derivative(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit)
{
    const Vec3 p = x.segment<3>(kPos);
    const Vec3 v = x.segment<3>(kVel);
    const Vec3 qv = x.segment<3>(kQuat);
    const double qw = x(kQuat + 3);
    const Vec3 w = x.segment<3>(kRate);

    StateVec dx;
    dx.segment<3>(kPos) = v;
    dx.segment<3>(kVel) = lvlh_accel(p, v, orbit);
    // 1/2 q ⊗ [w; 0]
    dx.segment<3>(kQuat) = 0.5 * (qw * w + qv.cross(w));
    dx(kQuat + 3) = -0.5 * qv.dot(w);
    const Mat3& J = vehicle.inertia;
    dx.segment<3>(kRate) = -J.ldlt().solve(w.cross(J * w));
    return dx;
}

StateVec coast_derivative(const ChaserState& x, const VehicleModel& vehicle, const OrbitModel& orbit)
{
    return coast_derivative(x.vector(), vehicle, orbit);
}

StateMat coast_jacobian(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit)
{
    const double n = orbit.mean_motion;
    const Vec3 qv = x.segment<3>(kQuat);
    const double qw = x(kQuat + 3);
    const Vec3 w = x.segment<3>(kRate);
    const Mat3& J = vehicle.inertia;

    StateMat A = StateMat::Zero();
    A.block<3, 3>(kPos, kVel) = Mat3::Identity();

    A(kVel + 0, kVel + 2) = -2.0 * n;
    A(kVel + 1, kPos + 1) = -n * n;
    A(kVel + 2, kPos + 2) = 3.0 * n * n;
    A(kVel + 2, kVel + 0) = 2.0 * n;

    A.block<3, 3>(kQuat, kQuat) = -0.5 * skew(w);
    A.block<3, 1>(kQuat, kQuat + 3) = 0.5 * w;
    A.block<1, 3>(kQuat + 3, kQuat) = -0.5 * w.transpose();
    A.block<3, 3>(kQuat, kRate) = 0.5 * (qw * Mat3::Identity() + skew(qv));
    A.block<1, 3>(kQuat + 3, kRate) = -0.5 * qv.transpose();

    const Mat3 Jinv = J.inverse();
    A.block<3, 3>(kRate, kRate) = -Jinv * (skew(w) * J - skew(J * w));
    return A;
}

StateMat coast_jacobian_fd(const StateVec& x, const VehicleModel& vehicle, const OrbitModel& orbit, double step)
{
    StateMat A;
    for (int j = 0; j < kStateDim; ++j) {
        StateVec xp = x;
        StateVec xm = x;
        xp(j) += step;
        xm(j) -= step;
        A.col(j) = (coast_derivative(xp, vehicle, orbit) - coast_derivative(xm, vehicle, orbit)) / (2.0 * step);
    }
    return A;
}

ChaserState impulse_jump(const ChaserState& x, std::span<const double> pulses, const VehicleModel& vehicle)
{
    if (static_cast<int>(pulses.size()) != vehicle.thruster_count()) {
        throw std::invalid_argument("pulse vector length does not match thruster count");
    }
    Vec3 force_body = Vec3::Zero();
    Vec3 torque_body = Vec3::Zero();
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const Thruster& t = vehicle.thrusters[i];
        force_body += pulses[i] * vehicle.thrust * t.direction;
        torque_body += pulses[i] * vehicle.thrust * t.position.cross(t.direction);
    }
    ChaserState out = x;
    out.v += quat_rotate(x.q, force_body) / vehicle.mass;
    out.w += vehicle.inertia.ldlt().solve(torque_body);
    return out;
}

JumpJacobians linearize_jump(const ChaserState& x, std::span<const double> pulses, const VehicleModel& vehicle)
{
    const int m = vehicle.thruster_count();
    if (static_cast<int>(pulses.size()) != m) {
        throw std::invalid_argument("pulse vector length does not match thruster count");
    }
    JumpJacobians jac;
    jac.d_state.setIdentity();
    jac.d_pulses.setZero(kStateDim, m);

    const Mat3 R = x.q.rotation_matrix();
    const Mat3 Jinv = vehicle.inertia.inverse();
    const double F = vehicle.thrust;

    Vec3 u = Vec3::Zero();  // summed impulse direction in body frame, s
    for (int i = 0; i < m; ++i) {
        const Thruster& t = vehicle.thrusters[static_cast<std::size_t>(i)];
        u += pulses[static_cast<std::size_t>(i)] * t.direction;
        jac.d_pulses.block<3, 1>(kVel, i) = (F / vehicle.mass) * (R * t.direction);
        jac.d_pulses.block<3, 1>(kRate, i) = F * (Jinv * t.position.cross(t.direction));
    }

    // d(q ⊗ u ⊗ q*)/dq for R u = (w² - |v|²) u + 2 (v·u) v + 2 w (v × u).
    const Vec3 qv = x.q.vec();
    const double qw = x.q.w;
    Eigen::Matrix<double, 3, 4> dRu;
    dRu.block<3, 3>(0, 0) = -2.0 * u * qv.transpose() + 2.0 * (qv * u.transpose() + qv.dot(u) * Mat3::Identity())
        - 2.0 * qw * skew(u);
    dRu.block<3, 1>(0, 3) = 2.0 * qw * u + 2.0 * qv.cross(u);
    jac.d_state.block<3, 4>(kVel, kQuat) = (F / vehicle.mass) * dRu;
    return jac;
}

ChaserState propagate_coast(const ChaserState& x, double dt, const VehicleModel& vehicle, const OrbitModel& orbit,
                            const PropagationOptions& opts)
{
    if (dt < 0.0) {
        throw std::invalid_argument("propagation interval must be non-negative");
    }
    const int steps = substep_count(dt, opts);
    if (steps == 0) {
        return x;
    }
    const double h = dt / steps;
    StateVec s = x.vector();
    const double qnorm = s.segment<4>(kQuat).norm();
    for (int k = 0; k < steps; ++k) {
        const StateVec k1 = coast_derivative(s, vehicle, orbit);
        const StateVec k2 = coast_derivative(s + 0.5 * h * k1, vehicle, orbit);
        const StateVec k3 = coast_derivative(s + 0.5 * h * k2, vehicle, orbit);
        const StateVec k4 = coast_derivative(s + h * k3, vehicle, orbit);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        hold_quaternion_norm(s, qnorm);
        check_finite(s);
    }
    return ChaserState::from_vector(s);
}

std::vector<ChaserState> propagate_coast_samples(const ChaserState& x, double dt, int samples,
                                                 const VehicleModel& vehicle, const OrbitModel& orbit,
                                                 const PropagationOptions& opts)
{
    if (samples < 1) {
        throw std::invalid_argument("sample count must be at least one");
    }
    std::vector<ChaserState> out;
    out.reserve(static_cast<std::size_t>(samples) + 1);
    out.push_back(x);
    PropagationOptions sub = opts;
    if (sub.max_step <= 0.0) {
        sub.max_step = dt / 20.0;
    }
    for (int i = 0; i < samples; ++i) {
        out.push_back(propagate_coast(out.back(), dt / samples, vehicle, orbit, sub));
    }
    return out;
}

CoastLinearization linearize_coast_segment(const ChaserState& x0, double dt, const VehicleModel& vehicle,
                                           const OrbitModel& orbit, const PropagationOptions& opts)
{
    if (dt < 0.0) {
        throw std::invalid_argument("segment duration must be non-negative");
    }
    CoastLinearization lin;
    StateVec s = x0.vector();
    StateMat phi = StateMat::Identity();
    const int steps = substep_count(dt, opts);
    const double qnorm = s.segment<4>(kQuat).norm();
    if (steps > 0) {
        const double h = dt / steps;
        for (int k = 0; k < steps; ++k) {
            const StateVec s1 = s;
            const StateVec k1 = coast_derivative(s1, vehicle, orbit);
            const StateMat m1 = coast_jacobian(s1, vehicle, orbit) * phi;
            const StateVec s2 = s + 0.5 * h * k1;
            const StateVec k2 = coast_derivative(s2, vehicle, orbit);
            const StateMat m2 = coast_jacobian(s2, vehicle, orbit) * (phi + 0.5 * h * m1);
            const StateVec s3 = s + 0.5 * h * k2;
            const StateVec k3 = coast_derivative(s3, vehicle, orbit);
            const StateMat m3 = coast_jacobian(s3, vehicle, orbit) * (phi + 0.5 * h * m2);
            const StateVec s4 = s + h * k3;
            const StateVec k4 = coast_derivative(s4, vehicle, orbit);
            const StateMat m4 = coast_jacobian(s4, vehicle, orbit) * (phi + h * m3);
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            phi += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
            hold_quaternion_norm(s, qnorm);
            check_finite(s);
            if (!phi.allFinite()) {
                throw DivergenceError("state transition matrix became non-finite");
            }
        }
    }
    lin.stm = phi;
    lin.final_state = s;
    lin.defect = s - phi * x0.vector();
    lin.final_derivative = coast_derivative(s, vehicle, orbit);
    return lin;
}

}  // namespace scpdock

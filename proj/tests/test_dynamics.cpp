#include <doctest.h>

#include "fixtures.hpp"
#include "scpdock/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace scpdock;
using namespace scpdock::testing;

namespace {

const OrbitModel kOrbit = OrbitModel::circular(400e3);

StateVec propagate_vec(const StateVec& x, double dt, const VehicleModel& v, const PropagationOptions& o = {})
{
    return propagate_coast(ChaserState::from_vector(x), dt, v, kOrbit, o).vector();
}

}  // namespace

TEST_CASE("Hamilton product and rotation agree")
{
    std::mt19937 rng(7);
    for (int i = 0; i < 10; ++i) {
        const Quaternion a = random_quat(rng);
        const Quaternion b = random_quat(rng);
        const Vec3 u = random_vec(rng, 3.0);
        // Composition: rotating by a⊗b equals rotating by b then a.
        const Vec3 lhs = quat_rotate(quat_mul(a, b), u);
        const Vec3 rhs = quat_rotate(a, quat_rotate(b, u));
        CHECK((lhs - rhs).norm() < 1e-12);
        // Explicit q ⊗ [u;0] ⊗ q*.
        const Quaternion up{u.x(), u.y(), u.z(), 0.0};
        const Quaternion r = quat_mul(quat_mul(a, up), a.conjugate());
        CHECK((r.vec() - quat_rotate(a, u)).norm() < 1e-12);
        CHECK(std::abs(r.w) < 1e-12);
        const Mat3 R = a.rotation_matrix();
        CHECK((R * R.transpose() - Mat3::Identity()).norm() < 1e-12);
        CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
    }
    const Quaternion yaw = Quaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2);
    CHECK((quat_rotate(yaw, Vec3::UnitX()) - Vec3::UnitY()).norm() < 1e-15);
}

TEST_CASE("slerp and attitude error")
{
    const Quaternion a = Quaternion::identity();
    const Quaternion b = Quaternion::from_axis_angle(Vec3(1, 2, 3), 1.2);
    CHECK(attitude_error(a, b) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(attitude_error(a, -b) == doctest::Approx(1.2).epsilon(1e-12));
    const Quaternion m = slerp(a, b, 0.5);
    CHECK(m.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(attitude_error(a, m) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(attitude_error(slerp(a, b, 1.0), b) < 1e-9);
}

TEST_CASE("orbit mean motion for 400 km")
{
    CHECK(kOrbit.mean_motion == doctest::Approx(1.131e-3).epsilon(1e-3));
}

TEST_CASE("coast Jacobian matches central differences")
{
    const VehicleModel v = small_vehicle();
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const StateVec x = random_state(rng).vector();
        StateMat fd;
        const double h = 1e-6;
        for (int j = 0; j < kStateDim; ++j) {
            StateVec xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            fd.col(j) = (coast_derivative(xp, v, kOrbit) - coast_derivative(xm, v, kOrbit)) / (2 * h);
        }
        CHECK(rel_err(coast_jacobian(x, v, kOrbit), fd, 1e-3) < 1e-5);
    }
}

TEST_CASE("jump map Jacobians match central differences")
{
    const VehicleModel v = small_vehicle();
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> pulse(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const ChaserState x = random_state(rng);
        std::vector<double> dt(4);
        for (double& d : dt) {
            d = pulse(rng);
        }
        const JumpJacobians J = linearize_jump(x, dt, v);
        const double h = 1e-6;
        StateMat fdx;
        for (int j = 0; j < kStateDim; ++j) {
            StateVec xp = x.vector(), xm = x.vector();
            xp(j) += h;
            xm(j) -= h;
            fdx.col(j) = (impulse_jump(ChaserState::from_vector(xp), dt, v).vector()
                          - impulse_jump(ChaserState::from_vector(xm), dt, v).vector()) / (2 * h);
        }
        CHECK(rel_err(J.d_state, fdx) < 1e-5);
        Eigen::Matrix<double, kStateDim, Eigen::Dynamic> fdu(kStateDim, 4);
        for (int i = 0; i < 4; ++i) {
            std::vector<double> up = dt, um = dt;
            up[static_cast<std::size_t>(i)] += h;
            um[static_cast<std::size_t>(i)] -= h;
            fdu.col(i) = (impulse_jump(x, up, v).vector() - impulse_jump(x, um, v).vector()) / (2 * h);
        }
        CHECK(rel_err(J.d_pulses, fdu, 1e-3) < 1e-5);
    }
}

TEST_CASE("single pulse changes velocity by F dt / m along the rotated axis")
{
    const VehicleModel v = small_vehicle();
    ChaserState x;
    x.q = Quaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi);
    const std::vector<double> dt{0.5, 0.0, 0.0, 0.0};
    const ChaserState y = impulse_jump(x, dt, v);
    CHECK((y.v - Vec3(-445.0 * 0.5 / 30323.0, 0, 0)).norm() < 1e-15);
    const Vec3 torque = 445.0 * 0.5 * Vec3(0.3, 2.1, 0.0).cross(Vec3::UnitX());
    CHECK((v.inertia * y.w - torque).norm() < 1e-9);
}

TEST_CASE("torque-free rotation conserves angular momentum and energy")
{
    const VehicleModel v = small_vehicle();
    ChaserState x;
    x.w = Vec3(0.01, -0.02, 0.015);
    x.q = Quaternion::from_axis_angle(Vec3(1, 1, 0), 0.3);
    const ChaserState y = propagate_coast(x, 200.0, v, kOrbit, {0.5});
    const Vec3 h0 = quat_rotate(x.q, v.inertia * x.w);
    const Vec3 h1 = quat_rotate(y.q, v.inertia * y.w);
    CHECK((h1 - h0).norm() / h0.norm() < 1e-9);
    CHECK(y.w.dot(v.inertia * y.w) == doctest::Approx(x.w.dot(v.inertia * x.w)).epsilon(1e-9));
    CHECK(y.q.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("RK4 converges at fourth order")
{
    const VehicleModel v = small_vehicle();
    std::mt19937 rng(3);
    const StateVec x = random_state(rng).vector();
    const StateVec ref = propagate_vec(x, 20.0, v, {0.01});
    const double e1 = (propagate_vec(x, 20.0, v, {2.0}) - ref).norm();
    const double e2 = (propagate_vec(x, 20.0, v, {1.0}) - ref).norm();
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
}

TEST_CASE("coast segment STM matches finite differences of the propagator")
{
    const VehicleModel v = small_vehicle();
    std::mt19937 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const ChaserState x = random_state(rng);
        const double dt = 11.0;
        const CoastLinearization lin = linearize_coast_segment(x, dt, v, kOrbit);
        CHECK(rel_err(lin.final_state, propagate_vec(x.vector(), dt, v)) < 1e-14);
        StateMat fd;
        const double h = 1e-6;
        for (int j = 0; j < kStateDim; ++j) {
            StateVec xp = x.vector(), xm = x.vector();
            xp(j) += h;
            xm(j) -= h;
            fd.col(j) = (propagate_vec(xp, dt, v) - propagate_vec(xm, dt, v)) / (2 * h);
        }
        for (int j = 0; j < kStateDim; ++j) {
            CHECK(rel_err(lin.stm.col(j), fd.col(j)) < 1e-5);
        }
        const double ht = 1e-4;
        const StateVec dtdiff = (propagate_vec(x.vector(), dt + ht, v) - propagate_vec(x.vector(), dt - ht, v)) / (2 * ht);
        CHECK(rel_err(lin.final_derivative, dtdiff, 1e-6) < 1e-5);
    }
}

TEST_CASE("vehicle validation")
{
    VehicleModel v = small_vehicle();
    CHECK_NOTHROW(v.validate());
    v.mass = 0.0;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = small_vehicle();
    v.inertia(0, 1) = 0.0;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = small_vehicle();
    v.thrusters[0].direction = Vec3(1, 1, 0);
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
}

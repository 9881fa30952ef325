#pragma once

#include "scpdock/dynamics.hpp"

#include <random>

namespace scpdock::testing {

inline VehicleModel small_vehicle()
{
    VehicleModel v;
    v.mass = 30323.0;
    v.inertia << 49249.0, 2862.0, -370.0,
                 2862.0, 108514.0, -3075.0,
                 -370.0, -3075.0, 110772.0;
    v.thrust = 445.0;
    v.pulse_min = 0.112;
    v.pulse_max = 1.0;
    v.pulse_buffer = 0.0112;
    v.thrusters = {
        {Vec3(0.3, 2.1, 0.0), Vec3::UnitX(), false},
        {Vec3(-0.3, 0.0, 2.1), -Vec3::UnitX(), true},
        {Vec3(0.0, -2.1, 0.0), Vec3(0.0, 0.0, 1.0), false},
        {Vec3(0.0, 0.0, -2.1), Vec3(0.0, 1.0, 0.0), false},
    };
    return v;
}

inline Vec3 random_vec(std::mt19937& rng, double scale)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return Vec3(u(rng), u(rng), u(rng)) * scale;
}

inline Quaternion random_quat(std::mt19937& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector4d v(n(rng), n(rng), n(rng), n(rng));
    return Quaternion::from_vector(v.normalized());
}

inline ChaserState random_state(std::mt19937& rng)
{
    ChaserState s;
    s.p = random_vec(rng, 100.0);
    s.v = random_vec(rng, 0.5);
    s.q = random_quat(rng);
    s.w = random_vec(rng, 0.02);
    return s;
}

// Max-abs relative error with a floor on the denominator.
template <class A, class B>
double rel_err(const A& a, const B& b, double floor = 1.0)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(floor, b.cwiseAbs().maxCoeff());
}

}  // namespace scpdock::testing

#include <doctest.h>

#include "ipm.hpp"
#include "scpdock/conic_program.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace scpdock;
using Eigen::VectorXd;

namespace {

SparseMat dense_to_sparse(const Eigen::MatrixXd& M)
{
    return M.sparseView();
}

VectorXd random_soc_interior(std::mt19937& rng, int d)
{
    std::normal_distribution<double> n(0.0, 1.0);
    VectorXd u(d);
    for (int i = 1; i < d; ++i) {
        u(i) = n(rng);
    }
    u(0) = u.tail(d - 1).norm() + 0.1 + std::abs(n(rng));
    return u;
}

}  // namespace

TEST_CASE("validator reports violations")
{
    ConicProgram empty(0);
    CHECK(validate(empty).empty());

    ConicProgram p(2);
    p.add_block(ConeType::SOC, dense_to_sparse(Eigen::MatrixXd::Ones(1, 2)), VectorXd::Zero(1));
    CHECK(validate(p).size() == 1);

    ConicProgram q(2);
    Eigen::MatrixXd M = Eigen::MatrixXd::Ones(2, 2);
    M(1, 1) = std::numeric_limits<double>::quiet_NaN();
    q.add_block(ConeType::NonNeg, dense_to_sparse(M), VectorXd::Zero(2));
    CHECK(validate(q).size() == 1);

    ConicProgram r(3);
    r.add_block(ConeType::Zero, dense_to_sparse(Eigen::MatrixXd::Ones(2, 3)), VectorXd::Zero(3));
    CHECK(validate(r).size() == 1);
}

TEST_CASE("text format round-trips bit-exactly")
{
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    ConicProgram p(5);
    for (int i = 0; i < 5; ++i) {
        p.c(i) = u(rng) / 3.0;
    }
    p.c(2) = 1e-300;
    p.c(3) = -0.1;
    for (ConeType cone : {ConeType::Zero, ConeType::NonNeg, ConeType::SOC}) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 5);
        for (int k = 0; k < 6; ++k) {
            M(static_cast<int>(rng() % 3), static_cast<int>(rng() % 5)) = u(rng) / 7.0;
        }
        VectorXd b(3);
        b << u(rng), std::nextafter(1.0, 2.0), 5e-324;
        p.add_block(cone, dense_to_sparse(M), b);
    }
    const std::string text = to_text(p);
    const ConicProgram q = from_text(text);
    REQUIRE(q.n == p.n);
    CHECK((q.c.array() == p.c.array()).all());
    REQUIRE(q.blocks.size() == p.blocks.size());
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
        CHECK(q.blocks[k].cone == p.blocks[k].cone);
        CHECK((q.blocks[k].b.array() == p.blocks[k].b.array()).all());
        const Eigen::MatrixXd a = Eigen::MatrixXd(p.blocks[k].A);
        const Eigen::MatrixXd bm = Eigen::MatrixXd(q.blocks[k].A);
        CHECK((a.array() == bm.array()).all());
    }
    CHECK(to_text(q) == text);
    CHECK_THROWS(from_text("conic_program 1\nn 2\nc 1\n"));
    CHECK_THROWS(from_text("conic_program 1\nn 1\nc 1\nblocks 1\nblock CONE 1 0\nb 0\n"));
}

TEST_CASE("textbook programs")
{
    SUBCASE("min x with x - 1 >= 0")
    {
        ConicProgram p(1);
        p.c(0) = 1.0;
        p.add_block(ConeType::NonNeg, dense_to_sparse(Eigen::MatrixXd::Ones(1, 1)), VectorXd::Constant(1, -1.0));
        const SolverResult r = solve(p);
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r.objective == doctest::Approx(p.c.dot(r.x)).epsilon(1e-12));
    }
    SUBCASE("min t with (t, 3, 4) in SOC")
    {
        ConicProgram p(1);
        p.c(0) = 1.0;
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 1);
        M(0, 0) = 1.0;
        VectorXd b(3);
        b << 0.0, 3.0, 4.0;
        p.add_block(ConeType::SOC, dense_to_sparse(M), b);
        const SolverResult r = solve(p);
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.x(0) == doctest::Approx(5.0).epsilon(1e-8));
    }
    SUBCASE("one-norm of (2, -3) via slack pairs")
    {
        // Variables: u+ (2), u- (2); u+ - u- = (2, -3); minimize sum.
        ConicProgram p(4);
        p.c.setOnes();
        Eigen::MatrixXd E(2, 4);
        E << 1, 0, -1, 0,
             0, 1, 0, -1;
        VectorXd b(2);
        b << -2.0, 3.0;
        p.add_block(ConeType::Zero, dense_to_sparse(E), b);
        p.add_block(ConeType::NonNeg, dense_to_sparse(Eigen::MatrixXd::Identity(4, 4)), VectorXd::Zero(4));
        const SolverResult r = solve(p);
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.objective == doctest::Approx(5.0).epsilon(1e-8));
    }
    SUBCASE("infeasible LP")
    {
        // x >= 1 and -x >= 0.
        ConicProgram p(1);
        p.c(0) = 1.0;
        Eigen::MatrixXd M(2, 1);
        M << 1.0, -1.0;
        VectorXd b(2);
        b << -1.0, 0.0;
        p.add_block(ConeType::NonNeg, dense_to_sparse(M), b);
        const SolverResult r = solve(p);
        CHECK(r.status == SolverStatus::Infeasible);
    }
}

TEST_CASE("Nesterov-Todd scaling identities")
{
    std::mt19937 rng(8);
    for (int t = 0; t < 10; ++t) {
        const int d = 2 + static_cast<int>(rng() % 6);
        const VectorXd s = random_soc_interior(rng, d);
        const VectorXd z = random_soc_interior(rng, d);
        const ipm::SocScaling sc = ipm::soc_scaling(s, z);
        CHECK((sc.W * sc.Winv - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-10);
        CHECK((sc.W * z - sc.Winv * s).norm() < 1e-10 * (1.0 + s.norm()));
        CHECK((sc.W - sc.W.transpose()).norm() < 1e-14);
        const VectorXd u = random_soc_interior(rng, d);
        const VectorXd v = VectorXd::Random(d);
        CHECK((ipm::soc_product(u, ipm::soc_division(u, v)) - v).norm() < 1e-10);
    }
}

TEST_CASE("cone step length matches bisection")
{
    std::mt19937 rng(13);
    std::normal_distribution<double> n(0.0, 1.0);
    auto inside = [](const VectorXd& u) { return u(0) >= u.tail(u.size() - 1).norm() - 1e-12; };
    for (int t = 0; t < 20; ++t) {
        const int d = 3;
        const VectorXd u = random_soc_interior(rng, d);
        VectorXd du(d);
        for (int i = 0; i < d; ++i) {
            du(i) = n(rng);
        }
        const double a = ipm::soc_max_step(u, du);
        double lo = 0.0, hi = 1e6;
        if (inside(u + hi * du)) {
            CHECK(a > 1e5);
            continue;
        }
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (lo + hi);
            (inside(u + mid * du) ? lo : hi) = mid;
        }
        CHECK(a == doctest::Approx(lo).epsilon(1e-6));
    }
}

TEST_CASE("random conic programs with planted optimum")
{
    // Pick x*, complementary (s*, z*), and multipliers y*; derive c, b, h so
    // that the planted point satisfies the KKT conditions exactly.
    std::mt19937 rng(99);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 12, p = 3, n_lp = 8;
        const std::vector<int> dims{4, 3};
        const int m = n_lp + 7;
        Eigen::MatrixXd A(p, n), G(m, n);
        for (int i = 0; i < p; ++i) for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
        for (int i = 0; i < m; ++i) for (int j = 0; j < n; ++j) G(i, j) = nd(rng);
        VectorXd x(n), y(p), s = VectorXd::Zero(m), z = VectorXd::Zero(m);
        for (int j = 0; j < n; ++j) x(j) = nd(rng);
        for (int i = 0; i < p; ++i) y(i) = nd(rng);
        for (int i = 0; i < n_lp; ++i) {
            (i % 2 ? s(i) : z(i)) = 0.5 + std::abs(nd(rng));
        }
        int off = n_lp;
        for (int d : dims) {
            // Complementary boundary pair: s = a(1, u), z = b(1, -u), |u| = 1.
            VectorXd u(d - 1);
            for (int i = 0; i < d - 1; ++i) u(i) = nd(rng);
            u.normalize();
            const double a = 0.5 + std::abs(nd(rng));
            const double bb = 0.5 + std::abs(nd(rng));
            s(off) = a;
            s.segment(off + 1, d - 1) = a * u;
            z(off) = bb;
            z.segment(off + 1, d - 1) = -bb * u;
            off += d;
        }
        ConicProgram prog(n);
        prog.c = -A.transpose() * y - G.transpose() * z;
        // Ax = b  ->  A x + (-b) ∈ 0 ; Gx + s = h -> -G x + h ∈ K.
        prog.add_block(ConeType::Zero, dense_to_sparse(A), -A * x);
        const VectorXd h = G * x + s;
        prog.add_block(ConeType::NonNeg, dense_to_sparse(-G.topRows(n_lp)), h.head(n_lp));
        prog.add_block(ConeType::SOC, dense_to_sparse(-G.middleRows(n_lp, 4)), h.segment(n_lp, 4));
        prog.add_block(ConeType::SOC, dense_to_sparse(-G.bottomRows(3)), h.tail(3));
        const double opt = prog.c.dot(x);
        const SolverResult r = solve(prog);
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(std::abs(r.objective - opt) <= 1e-6 * std::max(1.0, std::abs(opt)));
        CHECK(r.primal_residual <= 1e-7);
        CHECK(r.duality_gap <= 1e-6);
    }
}

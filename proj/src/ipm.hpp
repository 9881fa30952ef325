#pragma once

// Primal-dual interior-point method for
//
//   minimize    c'x
//   subject to  A x = b,  G x + s = h,  s ∈ K
//
// where K is a nonnegative orthant of dimension n_lp followed by second-order
// cones of the given dimensions. Homogeneous self-dual embedding with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace scpdock::ipm {

using SpMat = Eigen::SparseMatrix<double>;

struct Problem {
    Eigen::VectorXd c;
    SpMat A;  // p x n, may have zero rows
    Eigen::VectorXd b;
    SpMat G;  // m x n
    Eigen::VectorXd h;
    int n_lp = 0;
    std::vector<int> soc_dims;
};

struct Settings {
    int max_iters = 100;
    double feastol = 1e-9;
    double abstol = 1e-9;
    double reltol = 1e-9;
    double step_fraction = 0.99;
    double static_reg = 1e-8;
    int refine_steps = 12;
    int equilibration_passes = 15;
    bool verbose = false;
};

enum class Exit { Optimal, PrimalInfeasible, DualInfeasible, MaxIters, Stalled, Numerical };

struct Result {
    Exit exit = Exit::Numerical;
    Eigen::VectorXd x, y, z, s;
    int iterations = 0;
    double pcost = 0.0;
    double dcost = 0.0;
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    double relgap = 0.0;
};

Result solve(const Problem& prob, const Settings& settings = {});

// Second-order cone helpers, exposed for unit tests. Vectors are (u0, u1).
struct SocScaling {
    double eta = 1.0;
    Eigen::VectorXd wbar;
    Eigen::MatrixXd W;
    Eigen::MatrixXd Winv;
    Eigen::VectorXd lambda;
};

/// Nesterov-Todd scaling of one cone at strictly interior (s, z).
SocScaling soc_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z);
Eigen::VectorXd soc_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v);
/// v with u ∘ v = w.
Eigen::VectorXd soc_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w);
/// Largest alpha >= 0 with u + alpha du in the closed cone (infinity if none).
double soc_max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du);

}  // namespace scpdock::ipm

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace scpdock {

using SparseMat = Eigen::SparseMatrix<double>;

enum class ConeType { Zero, NonNeg, SOC };

const char* cone_name(ConeType cone);

/// One constraint block: A x + b ∈ cone. For SOC the first row is the
/// scalar (t) component.
struct ConeBlock {
    ConeType cone = ConeType::Zero;
    SparseMat A;
    Eigen::VectorXd b;

    int rows() const { return static_cast<int>(b.size()); }
};

struct ConicProgram {
    int n = 0;
    Eigen::VectorXd c;
    std::vector<ConeBlock> blocks;

    ConicProgram() = default;
    explicit ConicProgram(int num_vars) : n(num_vars), c(Eigen::VectorXd::Zero(num_vars)) {}

    void add_block(ConeType cone, SparseMat A, Eigen::VectorXd b);
    int row_count(ConeType cone) const;
};

/// Lists every invariant violation; empty means valid.
std::vector<std::string> validate(const ConicProgram& p);

/// Line-oriented debug text format (see docs/conic_text_format.md).
std::string to_text(const ConicProgram& p);
/// Throws std::runtime_error on malformed input.
ConicProgram from_text(const std::string& text);

/// Largest violation of A x + b ∈ K over all blocks, each divided by
/// 1 + max|b| of its block.
double primal_residual(const ConicProgram& p, const Eigen::VectorXd& x);

enum class SolverStatus { Optimal, Infeasible, NumericalError };

const char* status_name(SolverStatus s);

struct SolverOptions {
    int max_iters = 100;
    double feastol = 1e-9;
    double abstol = 1e-9;
    double reltol = 1e-9;
    /// Tolerance the adapter demands of OPTIMAL results.
    double validate_tol = 1e-7;
    bool verbose = false;
};

struct SolverResult {
    SolverStatus status = SolverStatus::NumericalError;
    Eigen::VectorXd x;
    double objective = 0.0;
    double solve_time = 0.0;  // s
    int iterations = 0;
    double primal_residual = 0.0;
    double duality_gap = 0.0;  // relative
    std::string message;
};

/// Solves the program with the bound backend. The backend is reentrant: it
/// keeps no global state, so independent programs may be solved concurrently.
SolverResult solve(const ConicProgram& p, const SolverOptions& opts = {});

/// Name of the bound backend, for logs.
const char* solver_backend_name();

}  // namespace scpdock

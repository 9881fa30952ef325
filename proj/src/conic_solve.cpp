// Adapter binding ConicProgram to the interior-point backend in ipm.cpp.
// This is the only translation unit that knows about the backend.

#include "ipm.hpp"
#include "scpdock/conic_program.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace scpdock {

namespace {

void append_rows(std::vector<Eigen::Triplet<double>>& trip, const SparseMat& A, int row_offset, double sign)
{
    for (int j = 0; j < A.outerSize(); ++j) {
        for (SparseMat::InnerIterator it(A, j); it; ++it) {
            trip.emplace_back(row_offset + static_cast<int>(it.row()), j, sign * it.value());
        }
    }
}

ipm::Problem to_backend(const ConicProgram& p)
{
    ipm::Problem q;
    q.c = p.c;
    const int n_eq = p.row_count(ConeType::Zero);
    const int n_lp = p.row_count(ConeType::NonNeg);
    const int n_soc = p.row_count(ConeType::SOC);
    std::vector<Eigen::Triplet<double>> ta, tg;
    q.b.resize(n_eq);
    q.h.resize(n_lp + n_soc);
    int eq_row = 0;
    int lp_row = 0;
    int soc_row = n_lp;
    for (const ConeBlock& blk : p.blocks) {
        switch (blk.cone) {
        case ConeType::Zero:
            append_rows(ta, blk.A, eq_row, 1.0);
            q.b.segment(eq_row, blk.rows()) = -blk.b;
            eq_row += blk.rows();
            break;
        case ConeType::NonNeg:
            append_rows(tg, blk.A, lp_row, -1.0);
            q.h.segment(lp_row, blk.rows()) = blk.b;
            lp_row += blk.rows();
            break;
        case ConeType::SOC:
            append_rows(tg, blk.A, soc_row, -1.0);
            q.h.segment(soc_row, blk.rows()) = blk.b;
            soc_row += blk.rows();
            q.soc_dims.push_back(blk.rows());
            break;
        }
    }
    q.n_lp = n_lp;
    q.A.resize(n_eq, p.n);
    q.A.setFromTriplets(ta.begin(), ta.end());
    q.G.resize(n_lp + n_soc, p.n);
    q.G.setFromTriplets(tg.begin(), tg.end());
    return q;
}

}  // namespace

const char* solver_backend_name()
{
    return "scpdock-ipm (homogeneous self-dual, NT scaling)";
}

SolverResult solve(const ConicProgram& p, const SolverOptions& opts)
{
    const auto errs = validate(p);
    if (!errs.empty()) {
        throw std::invalid_argument("invalid conic program: " + errs.front());
    }
    const auto t0 = std::chrono::steady_clock::now();
    ipm::Settings st;
    st.max_iters = opts.max_iters;
    st.feastol = opts.feastol;
    st.abstol = opts.abstol;
    st.reltol = opts.reltol;
    st.verbose = opts.verbose;
    const ipm::Result r = ipm::solve(to_backend(p), st);

    SolverResult out;
    out.iterations = r.iterations;
    out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.x = r.x;
    out.duality_gap = r.relgap;
    if (r.x.size() == p.n && r.x.allFinite()) {
        out.objective = p.c.dot(r.x);
        out.primal_residual = primal_residual(p, r.x);
    } else {
        out.x = Eigen::VectorXd::Zero(p.n);
        out.primal_residual = std::numeric_limits<double>::infinity();
    }

    switch (r.exit) {
    case ipm::Exit::Optimal:
        out.status = SolverStatus::Optimal;
        break;
    case ipm::Exit::PrimalInfeasible:
        out.status = SolverStatus::Infeasible;
        out.message = "primal infeasibility certificate found";
        return out;
    case ipm::Exit::DualInfeasible:
        out.status = SolverStatus::NumericalError;
        out.message = "problem appears unbounded";
        return out;
    case ipm::Exit::MaxIters:
    case ipm::Exit::Stalled:
    case ipm::Exit::Numerical:
        // Accept the best iterate at reduced accuracy when it is still a
        // certified near-optimal point.
        out.status = (r.relgap <= 1e-6 && r.dres <= 1e-6) ? SolverStatus::Optimal : SolverStatus::NumericalError;
        out.message = r.exit == ipm::Exit::MaxIters ? "iteration limit"
                      : r.exit == ipm::Exit::Stalled ? "step length stalled"
                                                     : "numerical failure in the KKT solve";
        break;
    }
    if (out.status == SolverStatus::Optimal && out.primal_residual > opts.validate_tol) {
        out.status = SolverStatus::NumericalError;
        out.message = "primal residual " + std::to_string(out.primal_residual) + " exceeds validation tolerance";
    }
    return out;
}

}  // namespace scpdock

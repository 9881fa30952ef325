#include "scpdock/conic_program.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace scpdock {

const char* cone_name(ConeType cone)
{
    switch (cone) {
    case ConeType::Zero:
        return "ZERO";
    case ConeType::NonNeg:
        return "NONNEG";
    case ConeType::SOC:
        return "SOC";
    }
    return "?";
}

const char* status_name(SolverStatus s)
{
    switch (s) {
    case SolverStatus::Optimal:
        return "OPTIMAL";
    case SolverStatus::Infeasible:
        return "INFEASIBLE";
    case SolverStatus::NumericalError:
        return "NUMERICAL_ERROR";
    }
    return "?";
}

void ConicProgram::add_block(ConeType cone, SparseMat A, Eigen::VectorXd b)
{
    ConeBlock blk;
    blk.cone = cone;
    blk.A = std::move(A);
    blk.A.makeCompressed();
    blk.b = std::move(b);
    blocks.push_back(std::move(blk));
}

int ConicProgram::row_count(ConeType cone) const
{
    int total = 0;
    for (const ConeBlock& blk : blocks) {
        if (blk.cone == cone) {
            total += blk.rows();
        }
    }
    return total;
}

std::vector<std::string> validate(const ConicProgram& p)
{
    std::vector<std::string> errs;
    if (p.n < 0) {
        errs.push_back("negative variable count");
    }
    if (p.c.size() != p.n) {
        errs.push_back("cost vector length " + std::to_string(p.c.size()) + " != n = " + std::to_string(p.n));
    }
    if (!p.c.allFinite()) {
        errs.push_back("cost vector has non-finite entries");
    }
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
        const ConeBlock& blk = p.blocks[k];
        const std::string tag = "block " + std::to_string(k) + " (" + cone_name(blk.cone) + "): ";
        if (blk.A.rows() != blk.b.size()) {
            errs.push_back(tag + "A has " + std::to_string(blk.A.rows()) + " rows but cone dimension is "
                           + std::to_string(blk.b.size()));
        }
        if (blk.A.cols() != p.n) {
            errs.push_back(tag + "A has " + std::to_string(blk.A.cols()) + " columns, expected " + std::to_string(p.n));
        }
        if (blk.cone == ConeType::SOC && blk.b.size() < 2) {
            errs.push_back(tag + "second-order cone dimension must be at least 2");
        }
        bool finite = blk.b.allFinite();
        for (int j = 0; j < blk.A.outerSize() && finite; ++j) {
            for (SparseMat::InnerIterator it(blk.A, j); it; ++it) {
                if (!std::isfinite(it.value())) {
                    finite = false;
                    break;
                }
            }
        }
        if (!finite) {
            errs.push_back(tag + "non-finite coefficient");
        }
    }
    return errs;
}

namespace {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ConeType parse_cone(const std::string& s)
{
    if (s == "ZERO") {
        return ConeType::Zero;
    }
    if (s == "NONNEG") {
        return ConeType::NonNeg;
    }
    if (s == "SOC") {
        return ConeType::SOC;
    }
    throw std::runtime_error("unknown cone tag '" + s + "'");
}

template <class T>
T read_token(std::istream& in, const char* what)
{
    T v;
    if (!(in >> v)) {
        throw std::runtime_error(std::string("conic text: expected ") + what);
    }
    return v;
}

double read_double(std::istream& in, const char* what)
{
    const std::string tok = read_token<std::string>(in, what);
    // strtod, unlike stod, accepts subnormal values.
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tok.c_str());
    if (used != tok.size()) {
        throw std::runtime_error(std::string("conic text: malformed number for ") + what + ": '" + tok + "'");
    }
    return v;
}

void expect_keyword(std::istream& in, const std::string& kw)
{
    const std::string tok = read_token<std::string>(in, kw.c_str());
    if (tok != kw) {
        throw std::runtime_error("conic text: expected '" + kw + "', got '" + tok + "'");
    }
}

}  // namespace

std::string to_text(const ConicProgram& p)
{
    std::ostringstream out;
    out << "conic_program 1\n";
    out << "n " << p.n << "\n";
    out << "c";
    for (Eigen::Index i = 0; i < p.c.size(); ++i) {
        out << ' ' << fmt17(p.c(i));
    }
    out << "\n";
    out << "blocks " << p.blocks.size() << "\n";
    for (const ConeBlock& blk : p.blocks) {
        out << "block " << cone_name(blk.cone) << ' ' << blk.rows() << ' ' << blk.A.nonZeros() << "\n";
        for (int j = 0; j < blk.A.outerSize(); ++j) {
            for (SparseMat::InnerIterator it(blk.A, j); it; ++it) {
                out << it.row() << ' ' << it.col() << ' ' << fmt17(it.value()) << "\n";
            }
        }
        out << "b";
        for (Eigen::Index i = 0; i < blk.b.size(); ++i) {
            out << ' ' << fmt17(blk.b(i));
        }
        out << "\n";
    }
    return out.str();
}

ConicProgram from_text(const std::string& text)
{
    std::istringstream in(text);
    expect_keyword(in, "conic_program");
    if (read_token<int>(in, "format version") != 1) {
        throw std::runtime_error("conic text: unsupported format version");
    }
    expect_keyword(in, "n");
    const int n = read_token<int>(in, "variable count");
    if (n < 0) {
        throw std::runtime_error("conic text: negative variable count");
    }
    ConicProgram p(n);
    expect_keyword(in, "c");
    for (int i = 0; i < n; ++i) {
        p.c(i) = read_double(in, "cost entry");
    }
    expect_keyword(in, "blocks");
    const int nb = read_token<int>(in, "block count");
    for (int k = 0; k < nb; ++k) {
        expect_keyword(in, "block");
        const ConeType cone = parse_cone(read_token<std::string>(in, "cone tag"));
        const int rows = read_token<int>(in, "row count");
        const long nnz = read_token<long>(in, "nonzero count");
        if (rows < 0 || nnz < 0) {
            throw std::runtime_error("conic text: negative block dimension");
        }
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nnz));
        for (long t = 0; t < nnz; ++t) {
            const int r = read_token<int>(in, "row index");
            const int col = read_token<int>(in, "column index");
            const double v = read_double(in, "coefficient");
            if (r < 0 || r >= rows || col < 0 || col >= n) {
                throw std::runtime_error("conic text: triplet index out of range");
            }
            trip.emplace_back(r, col, v);
        }
        SparseMat A(rows, n);
        A.setFromTriplets(trip.begin(), trip.end());
        expect_keyword(in, "b");
        Eigen::VectorXd b(rows);
        for (int i = 0; i < rows; ++i) {
            b(i) = read_double(in, "offset entry");
        }
        p.add_block(cone, std::move(A), std::move(b));
    }
    std::string extra;
    if (in >> extra) {
        throw std::runtime_error("conic text: trailing content '" + extra + "'");
    }
    return p;
}

double primal_residual(const ConicProgram& p, const Eigen::VectorXd& x)
{
    double worst = 0.0;
    for (const ConeBlock& blk : p.blocks) {
        const Eigen::VectorXd r = blk.A * x + blk.b;
        const double scale = 1.0 + (blk.b.size() ? blk.b.cwiseAbs().maxCoeff() : 0.0);
        double viol = 0.0;
        switch (blk.cone) {
        case ConeType::Zero:
            viol = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
            break;
        case ConeType::NonNeg:
            viol = r.size() ? std::max(0.0, -r.minCoeff()) : 0.0;
            break;
        case ConeType::SOC:
            viol = std::max(0.0, r.tail(r.size() - 1).norm() - r(0));
            break;
        }
        worst = std::max(worst, viol / scale);
    }
    return worst;
}

}  // namespace scpdock

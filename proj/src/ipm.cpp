#include "ipm.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace scpdock::ipm {

namespace {

using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double soc_residual(const VectorXd& u)
{
    const double t = u(0);
    const double r = u.tail(u.size() - 1).norm();
    return (t - r) * (t + r);
}

}  // namespace

Eigen::VectorXd soc_product(const VectorXd& u, const VectorXd& v)
{
    VectorXd w(u.size());
    w(0) = u.dot(v);
    w.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
    return w;
}

Eigen::VectorXd soc_division(const VectorXd& u, const VectorXd& w)
{
    const Eigen::Index d = u.size() - 1;
    const double rho = soc_residual(u);
    VectorXd v(u.size());
    v(0) = (u(0) * w(0) - u.tail(d).dot(w.tail(d))) / rho;
    v.tail(d) = (w.tail(d) - v(0) * u.tail(d)) / u(0);
    return v;
}

double soc_max_step(const VectorXd& u, const VectorXd& du)
{
    const Eigen::Index d = u.size() - 1;
    const double a = du(0) * du(0) - du.tail(d).squaredNorm();
    const double b = 2.0 * (u(0) * du(0) - u.tail(d).dot(du.tail(d)));
    const double c = std::max(soc_residual(u), 0.0);
    double alpha = kInf;
    if (u(0) <= 0.0 || c <= 0.0) {
        return 0.0;
    }
    // Smallest positive root of a t^2 + b t + c.
    if (std::abs(a) < 1e-300) {
        if (b < 0.0) {
            alpha = -c / b;
        }
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            const double r1 = q / a;
            const double r2 = (q != 0.0) ? c / q : kInf;
            for (double r : {r1, r2}) {
                if (r > 0.0) {
                    alpha = std::min(alpha, r);
                }
            }
        }
    }
    if (du(0) < 0.0) {
        alpha = std::min(alpha, -u(0) / du(0));
    }
    return alpha;
}

SocScaling soc_scaling(const VectorXd& s, const VectorXd& z)
{
    const Eigen::Index d = s.size() - 1;
    const double sres = soc_residual(s);
    const double zres = soc_residual(z);
    const VectorXd sb = s / std::sqrt(sres);
    const VectorXd zb = z / std::sqrt(zres);
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    SocScaling sc;
    sc.eta = std::pow(sres / zres, 0.25);
    sc.wbar.resize(s.size());
    sc.wbar(0) = (sb(0) + zb(0)) / (2.0 * gamma);
    sc.wbar.tail(d) = (sb.tail(d) - zb.tail(d)) / (2.0 * gamma);
    const double w0 = sc.wbar(0);
    const VectorXd w1 = sc.wbar.tail(d);
    Eigen::MatrixXd core(s.size(), s.size());
    core(0, 0) = w0;
    core.block(0, 1, 1, d) = w1.transpose();
    core.block(1, 0, d, 1) = w1;
    core.block(1, 1, d, d) = Eigen::MatrixXd::Identity(d, d) + w1 * w1.transpose() / (1.0 + w0);
    sc.W = sc.eta * core;
    core.block(0, 1, 1, d) *= -1.0;
    core.block(1, 0, d, 1) *= -1.0;
    sc.Winv = core / sc.eta;
    sc.lambda = sc.W * z;
    return sc;
}

namespace {

// Cone bookkeeping for the whole product cone.
class ProductCone {
public:
    ProductCone(int n_lp, std::vector<int> soc_dims) : n_lp_(n_lp), dims_(std::move(soc_dims))
    {
        int off = n_lp_;
        for (int d : dims_) {
            offsets_.push_back(off);
            off += d;
        }
        m_ = off;
        soc_.resize(dims_.size());
    }

    int size() const { return m_; }
    int degree() const { return n_lp_ + static_cast<int>(dims_.size()); }
    int n_lp() const { return n_lp_; }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<int>& offsets() const { return offsets_; }

    VectorXd identity() const
    {
        VectorXd e = VectorXd::Zero(m_);
        e.head(n_lp_).setOnes();
        for (int off : offsets_) {
            e(off) = 1.0;
        }
        return e;
    }

    // Smallest "eigenvalue" of u: min over cones of u_i or u0 - |u1|.
    double min_eig(const VectorXd& u) const
    {
        double v = kInf;
        if (n_lp_ > 0) {
            v = u.head(n_lp_).minCoeff();
        }
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            const auto seg = u.segment(offsets_[k], dims_[k]);
            v = std::min(v, seg(0) - seg.tail(dims_[k] - 1).norm());
        }
        return v;
    }

    double max_step(const VectorXd& u, const VectorXd& du) const
    {
        double alpha = kInf;
        for (int i = 0; i < n_lp_; ++i) {
            if (du(i) < 0.0) {
                alpha = std::min(alpha, -u(i) / du(i));
            }
        }
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            alpha = std::min(alpha, soc_max_step(u.segment(offsets_[k], dims_[k]), du.segment(offsets_[k], dims_[k])));
        }
        return alpha;
    }

    bool update_scaling(const VectorXd& s, const VectorXd& z)
    {
        lp_w_.resize(n_lp_);
        lambda_.resize(m_);
        for (int i = 0; i < n_lp_; ++i) {
            if (!(s(i) > 0.0 && z(i) > 0.0)) {
                return false;
            }
            lp_w_(i) = std::sqrt(s(i) / z(i));
            lambda_(i) = std::sqrt(s(i) * z(i));
        }
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            const VectorXd sk = s.segment(offsets_[k], dims_[k]);
            const VectorXd zk = z.segment(offsets_[k], dims_[k]);
            if (!(sk(0) > 0.0 && zk(0) > 0.0 && soc_residual(sk) > 0.0 && soc_residual(zk) > 0.0)) {
                return false;
            }
            soc_[k].sc = soc_scaling(sk, zk);
            soc_[k].W2 = soc_[k].sc.W * soc_[k].sc.W;
            lambda_.segment(offsets_[k], dims_[k]) = soc_[k].sc.lambda;
        }
        return lambda_.allFinite();
    }

    const VectorXd& lambda() const { return lambda_; }

    VectorXd apply_W(const VectorXd& u) const
    {
        VectorXd out(m_);
        out.head(n_lp_) = lp_w_.cwiseProduct(u.head(n_lp_));
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            out.segment(offsets_[k], dims_[k]) = soc_[k].sc.W * u.segment(offsets_[k], dims_[k]);
        }
        return out;
    }

    VectorXd apply_Winv(const VectorXd& u) const
    {
        VectorXd out(m_);
        out.head(n_lp_) = u.head(n_lp_).cwiseQuotient(lp_w_);
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            out.segment(offsets_[k], dims_[k]) = soc_[k].sc.Winv * u.segment(offsets_[k], dims_[k]);
        }
        return out;
    }

    VectorXd apply_W2(const VectorXd& u) const
    {
        VectorXd out(m_);
        out.head(n_lp_) = lp_w_.cwiseAbs2().cwiseProduct(u.head(n_lp_));
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            out.segment(offsets_[k], dims_[k]) = soc_[k].W2 * u.segment(offsets_[k], dims_[k]);
        }
        return out;
    }

    VectorXd product(const VectorXd& u, const VectorXd& v) const
    {
        VectorXd out(m_);
        out.head(n_lp_) = u.head(n_lp_).cwiseProduct(v.head(n_lp_));
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            out.segment(offsets_[k], dims_[k])
                = soc_product(u.segment(offsets_[k], dims_[k]), v.segment(offsets_[k], dims_[k]));
        }
        return out;
    }

    // v with lambda ∘ v = w.
    VectorXd lambda_div(const VectorXd& w) const
    {
        VectorXd out(m_);
        out.head(n_lp_) = w.head(n_lp_).cwiseQuotient(lambda_.head(n_lp_));
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            out.segment(offsets_[k], dims_[k])
                = soc_division(lambda_.segment(offsets_[k], dims_[k]), w.segment(offsets_[k], dims_[k]));
        }
        return out;
    }

    double lp_w2(int i) const { return lp_w_(i) * lp_w_(i); }
    const Eigen::MatrixXd& soc_w2(std::size_t k) const { return soc_[k].W2; }

private:
    struct SocState {
        SocScaling sc;
        Eigen::MatrixXd W2;
    };

    int n_lp_;
    std::vector<int> dims_;
    std::vector<int> offsets_;
    int m_ = 0;
    VectorXd lp_w_;
    VectorXd lambda_;
    std::vector<SocState> soc_;
};

// Symmetric quasi-definite KKT matrix
//   [ δI   A'    G'   ]
//   [ A   -δI    0    ]
//   [ G    0   -W²-δI ]
// stored as its lower triangle with a fixed sparsity pattern.
class KktSystem {
public:
    KktSystem(const SpMat& A, const SpMat& G, const ProductCone& cone, double reg)
        : n_(static_cast<int>(A.cols())), p_(static_cast<int>(A.rows())), m_(static_cast<int>(G.rows())), reg_(reg)
    {
        const int N = n_ + p_ + m_;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(A.nonZeros() + G.nonZeros() + N) + 64);
        for (int i = 0; i < n_; ++i) {
            trip.emplace_back(i, i, reg_);
        }
        for (int j = 0; j < A.outerSize(); ++j) {
            for (SpMat::InnerIterator it(A, j); it; ++it) {
                trip.emplace_back(n_ + static_cast<int>(it.row()), j, it.value());
            }
        }
        for (int i = 0; i < p_; ++i) {
            trip.emplace_back(n_ + i, n_ + i, -reg_);
        }
        for (int j = 0; j < G.outerSize(); ++j) {
            for (SpMat::InnerIterator it(G, j); it; ++it) {
                trip.emplace_back(n_ + p_ + static_cast<int>(it.row()), j, it.value());
            }
        }
        const int zo = n_ + p_;
        for (int i = 0; i < cone.n_lp(); ++i) {
            trip.emplace_back(zo + i, zo + i, -1.0);
        }
        for (std::size_t k = 0; k < cone.dims().size(); ++k) {
            const int off = zo + cone.offsets()[k];
            const int d = cone.dims()[k];
            for (int j = 0; j < d; ++j) {
                for (int i = j; i < d; ++i) {
                    trip.emplace_back(off + i, off + j, i == j ? -1.0 : 0.0);
                }
            }
        }
        K_.resize(N, N);
        K_.setFromTriplets(trip.begin(), trip.end());
        K_.makeCompressed();

        // Locate value slots of the scaling block, in fill order.
        auto slot = [&](int r, int c) {
            for (int idx = K_.outerIndexPtr()[c]; idx < K_.outerIndexPtr()[c + 1]; ++idx) {
                if (K_.innerIndexPtr()[idx] == r) {
                    return idx;
                }
            }
            return -1;
        };
        for (int i = 0; i < cone.n_lp(); ++i) {
            lp_slots_.push_back(slot(zo + i, zo + i));
        }
        for (std::size_t k = 0; k < cone.dims().size(); ++k) {
            const int off = zo + cone.offsets()[k];
            const int d = cone.dims()[k];
            std::vector<int> s;
            for (int j = 0; j < d; ++j) {
                for (int i = j; i < d; ++i) {
                    s.push_back(slot(off + i, off + j));
                }
            }
            soc_slots_.push_back(std::move(s));
        }
        ldlt_.analyzePattern(K_);
    }

    // Installs -W² - δI and factorizes. Returns false on failure.
    bool factor(const ProductCone& cone)
    {
        double* val = K_.valuePtr();
        for (int i = 0; i < cone.n_lp(); ++i) {
            val[lp_slots_[static_cast<std::size_t>(i)]] = -cone.lp_w2(i) - reg_;
        }
        for (std::size_t k = 0; k < cone.dims().size(); ++k) {
            const int d = cone.dims()[k];
            const Eigen::MatrixXd& W2 = cone.soc_w2(k);
            std::size_t t = 0;
            for (int j = 0; j < d; ++j) {
                for (int i = j; i < d; ++i) {
                    val[soc_slots_[k][t++]] = -W2(i, j) - (i == j ? reg_ : 0.0);
                }
            }
        }
        ldlt_.factorize(K_);
        return ldlt_.info() == Eigen::Success;
    }

    // Solves the unregularized system with iterative refinement.
    VectorXd solve(const VectorXd& rhs, int refine_steps) const
    {
        VectorXd sol = ldlt_.solve(rhs);
        const double tol = 1e-14 * (1.0 + rhs.cwiseAbs().maxCoeff());
        for (int it = 0; it < refine_steps; ++it) {
            const VectorXd r = rhs - apply_true(sol);
            if (!r.allFinite() || r.cwiseAbs().maxCoeff() <= tol) {
                break;
            }
            sol += ldlt_.solve(r);
        }
        return sol;
    }

private:
    VectorXd apply_true(const VectorXd& v) const
    {
        VectorXd out = K_.selfadjointView<Eigen::Lower>() * v;
        out.head(n_) -= reg_ * v.head(n_);
        out.tail(p_ + m_) += reg_ * v.tail(p_ + m_);
        return out;
    }

    int n_, p_, m_;
    double reg_;
    SpMat K_;
    std::vector<int> lp_slots_;
    std::vector<std::vector<int>> soc_slots_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

// Ruiz equilibration of [A; G]: returns column scaling D and row scalings
// E (for A) and F (for G); every second-order cone shares one row scale.
struct Equilibration {
    VectorXd D, E, F;
};

Equilibration equilibrate(const SpMat& A, const SpMat& G, const ProductCone& cone, int passes)
{
    const int n = static_cast<int>(A.cols());
    Equilibration eq{VectorXd::Ones(n), VectorXd::Ones(A.rows()), VectorXd::Ones(G.rows())};
    SpMat As = A;
    SpMat Gs = G;
    auto safe = [](double v) { return v > 1e-300 ? 1.0 / std::sqrt(v) : 1.0; };
    for (int pass = 0; pass < passes; ++pass) {
        VectorXd colmax = VectorXd::Zero(n);
        VectorXd rowA = VectorXd::Zero(As.rows());
        VectorXd rowG = VectorXd::Zero(Gs.rows());
        for (int j = 0; j < n; ++j) {
            for (SpMat::InnerIterator it(As, j); it; ++it) {
                const double a = std::abs(it.value());
                colmax(j) = std::max(colmax(j), a);
                rowA(it.row()) = std::max(rowA(it.row()), a);
            }
            for (SpMat::InnerIterator it(Gs, j); it; ++it) {
                const double a = std::abs(it.value());
                colmax(j) = std::max(colmax(j), a);
                rowG(it.row()) = std::max(rowG(it.row()), a);
            }
        }
        for (std::size_t k = 0; k < cone.dims().size(); ++k) {
            auto seg = rowG.segment(cone.offsets()[k], cone.dims()[k]);
            seg.setConstant(seg.maxCoeff());
        }
        VectorXd dc(n), ea(As.rows()), fg(Gs.rows());
        for (int j = 0; j < n; ++j) {
            dc(j) = safe(colmax(j));
        }
        for (Eigen::Index i = 0; i < ea.size(); ++i) {
            ea(i) = safe(rowA(i));
        }
        for (Eigen::Index i = 0; i < fg.size(); ++i) {
            fg(i) = safe(rowG(i));
        }
        As = ea.asDiagonal() * As * dc.asDiagonal();
        Gs = fg.asDiagonal() * Gs * dc.asDiagonal();
        eq.D = eq.D.cwiseProduct(dc);
        eq.E = eq.E.cwiseProduct(ea);
        eq.F = eq.F.cwiseProduct(fg);
    }
    return eq;
}

}  // namespace

Result solve(const Problem& prob, const Settings& st)
{
    ProductCone cone(prob.n_lp, prob.soc_dims);
    const int n = static_cast<int>(prob.c.size());
    const int p = static_cast<int>(prob.b.size());
    const int m = cone.size();

    Result res;
    if (prob.G.rows() != m || prob.h.size() != m || prob.G.cols() != n || prob.A.rows() != p || prob.A.cols() != n) {
        res.exit = Exit::Numerical;
        return res;
    }

    const Equilibration eq = equilibrate(prob.A, prob.G, cone, st.equilibration_passes);
    const SpMat A = eq.E.asDiagonal() * prob.A * eq.D.asDiagonal();
    const SpMat G = eq.F.asDiagonal() * prob.G * eq.D.asDiagonal();
    VectorXd c = eq.D.cwiseProduct(prob.c);
    // Cost scaling keeps the dual iterates near unit size.
    const double cscale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
    c /= cscale;
    const VectorXd b = eq.E.cwiseProduct(prob.b);
    const VectorXd h = eq.F.cwiseProduct(prob.h);
    const SpMat At = A.transpose();
    const SpMat Gt = G.transpose();

    const double bnorm = std::max(1.0, b.norm());
    const double hnorm = std::max(1.0, h.norm());
    const double cnorm = std::max(1.0, c.norm());

    KktSystem kkt(A, G, cone, st.static_reg);
    const VectorXd e = cone.identity();

    auto unscale = [&](Result& r, const VectorXd& x, const VectorXd& y, const VectorXd& z, const VectorXd& s, double tau) {
        r.x = eq.D.cwiseProduct(x) / tau;
        r.y = cscale * eq.E.cwiseProduct(y) / tau;
        r.z = cscale * eq.F.cwiseProduct(z) / tau;
        r.s = s.cwiseQuotient(eq.F) / tau;
    };

    // Initial point from two least-squares solves with W = I.
    {
        ProductCone unit(prob.n_lp, prob.soc_dims);
        VectorXd one = e;
        unit.update_scaling(one, one);
        if (!kkt.factor(unit)) {
            res.exit = Exit::Numerical;
            return res;
        }
    }
    VectorXd rhs(n + p + m);
    rhs << VectorXd::Zero(n), b, h;
    VectorXd sol = kkt.solve(rhs, st.refine_steps);
    VectorXd x = sol.head(n);
    VectorXd s = -sol.tail(m);
    {
        const double alpha = -cone.min_eig(s);
        if (m > 0 && alpha >= -1e-8) {
            s += (1.0 + alpha) * e;
        }
    }
    rhs << -c, VectorXd::Zero(p), VectorXd::Zero(m);
    sol = kkt.solve(rhs, st.refine_steps);
    VectorXd y = sol.segment(n, p);
    VectorXd z = sol.tail(m);
    {
        const double alpha = -cone.min_eig(z);
        if (m > 0 && alpha >= -1e-8) {
            z += (1.0 + alpha) * e;
        }
    }
    double tau = 1.0;
    double kappa = 1.0;

    struct Best {
        bool valid = false;
        double merit = kInf;
        VectorXd x, y, z, s;
        double tau = 1.0;
        double pres = 0, dres = 0, gap = 0, relgap = 0, pcost = 0, dcost = 0;
    } best;

    int stall = 0;
    for (int iter = 0; iter <= st.max_iters; ++iter) {
        res.iterations = iter;
        const VectorXd Ax = A * x;
        const VectorXd Gx = G * x;
        const VectorXd rx = At * y + Gt * z + c * tau;
        const VectorXd ry = -Ax + b * tau;
        const VectorXd rz = s + Gx - h * tau;
        const double cx = c.dot(x);
        const double by = b.dot(y);
        const double hz = h.dot(z);
        const double rt = kappa + cx + by + hz;

        const double pres = std::max(ry.norm() / bnorm, rz.norm() / hnorm) / tau;
        const double dres = rx.norm() / cnorm / tau;
        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double gap = s.dot(z) / (tau * tau);
        const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

        if (st.verbose) {
            std::fprintf(stderr, "ipm %3d pcost %+.6e dcost %+.6e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n",
                         iter, pcost, dcost, pres, dres, gap, tau, kappa);
        }

        const double merit = std::max({pres, dres, std::min(gap, relgap)});
        if (std::isfinite(merit) && merit < best.merit) {
            best = {true, merit, x, y, z, s, tau, pres, dres, gap, relgap, pcost, dcost};
        }

        if (pres < st.feastol && dres < st.feastol && (gap < st.abstol || relgap < st.reltol)) {
            res.exit = Exit::Optimal;
            break;
        }
        const double dual_obj = by + hz;
        if (dual_obj < 0.0 && (At * y + Gt * z).norm() / cnorm < st.feastol * -dual_obj && tau < kappa) {
            res.exit = Exit::PrimalInfeasible;
            break;
        }
        if (cx < 0.0 && std::max(Ax.norm() / bnorm, (Gx + s).norm() / hnorm) < st.feastol * -cx && tau < kappa) {
            res.exit = Exit::DualInfeasible;
            break;
        }
        if (iter == st.max_iters) {
            res.exit = Exit::MaxIters;
            break;
        }

        if (!cone.update_scaling(s, z) || !kkt.factor(cone)) {
            res.exit = Exit::Numerical;
            break;
        }
        const VectorXd& lam = cone.lambda();
        const double mu = (s.dot(z) + tau * kappa) / (cone.degree() + 1);

        rhs << -c, b, h;
        const VectorXd d1 = kkt.solve(rhs, st.refine_steps);
        const double den = c.dot(d1.head(n)) + b.dot(d1.segment(n, p)) + h.dot(d1.tail(m)) - kappa / tau;

        // Affine (predictor) direction.
        rhs << -rx, ry, -rz + s;
        VectorXd d2 = kkt.solve(rhs, st.refine_steps);
        double dk = -tau * kappa;
        double dtau = (-rt - dk / tau - (c.dot(d2.head(n)) + b.dot(d2.segment(n, p)) + h.dot(d2.tail(m)))) / den;
        VectorXd dz = d2.tail(m) + dtau * d1.tail(m);
        VectorXd ds = -s - cone.apply_W2(dz);
        double dkappa = (dk - kappa * dtau) / tau;

        double alpha = std::min({cone.max_step(s, ds), cone.max_step(z, dz), 1.0});
        if (dtau < 0.0) {
            alpha = std::min(alpha, -tau / dtau);
        }
        if (dkappa < 0.0) {
            alpha = std::min(alpha, -kappa / dkappa);
        }
        const double sigma = std::clamp(std::pow(1.0 - alpha, 3.0), 0.0, 1.0);

        // Combined (corrector) direction.
        const VectorXd ds_lam = -cone.product(lam, lam) - cone.product(cone.apply_Winv(ds), cone.apply_W(dz))
                                + sigma * mu * e;
        const VectorXd w_term = cone.apply_W(cone.lambda_div(ds_lam));
        dk = -tau * kappa - dtau * dkappa + sigma * mu;
        rhs << -(1.0 - sigma) * rx, (1.0 - sigma) * ry, -(1.0 - sigma) * rz - w_term;
        d2 = kkt.solve(rhs, st.refine_steps);
        dtau = (-(1.0 - sigma) * rt - dk / tau - (c.dot(d2.head(n)) + b.dot(d2.segment(n, p)) + h.dot(d2.tail(m))))
               / den;
        const VectorXd dx = d2.head(n) + dtau * d1.head(n);
        const VectorXd dy = d2.segment(n, p) + dtau * d1.segment(n, p);
        dz = d2.tail(m) + dtau * d1.tail(m);
        ds = w_term - cone.apply_W2(dz);
        dkappa = (dk - kappa * dtau) / tau;

        if (!dx.allFinite() || !dz.allFinite() || !std::isfinite(dtau)) {
            res.exit = Exit::Numerical;
            break;
        }

        alpha = std::min(cone.max_step(s, ds), cone.max_step(z, dz));
        if (dtau < 0.0) {
            alpha = std::min(alpha, -tau / dtau);
        }
        if (dkappa < 0.0) {
            alpha = std::min(alpha, -kappa / dkappa);
        }
        alpha = std::min(1.0, st.step_fraction * alpha);

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;

        stall = alpha < 1e-8 ? stall + 1 : 0;
        if (stall >= 3) {
            res.exit = Exit::Stalled;
            break;
        }
    }

    if (res.exit == Exit::Optimal || res.exit == Exit::PrimalInfeasible || res.exit == Exit::DualInfeasible
        || !best.valid) {
        const VectorXd rxs = At * y + Gt * z + c * tau;
        unscale(res, x, y, z, s, tau);
        res.pcost = prob.c.dot(res.x);
        res.dcost = -(prob.b.dot(res.y) + prob.h.dot(res.z));
        res.pres = std::max((A * x - b * tau).norm() / bnorm, (s + G * x - h * tau).norm() / hnorm) / tau;
        res.dres = rxs.norm() / cnorm / tau;
        res.gap = cscale * s.dot(z) / (tau * tau);
        res.relgap = res.gap / std::max({1.0, std::abs(res.pcost), std::abs(res.dcost)});
    } else {
        unscale(res, best.x, best.y, best.z, best.s, best.tau);
        res.pcost = prob.c.dot(res.x);
        res.dcost = -(prob.b.dot(res.y) + prob.h.dot(res.z));
        res.pres = best.pres;
        res.dres = best.dres;
        res.gap = cscale * best.gap;
        res.relgap = best.relgap;
    }
    return res;
}

}  // namespace scpdock::ipm

#include "scpdock/ptr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace scpdock {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

StateVec state_scale(const ScalingConfig& s)
{
    StateVec v;
    v.segment<3>(kPos).setConstant(s.position);
    v.segment<3>(kVel).setConstant(s.velocity);
    v.segment<4>(kQuat).setConstant(s.quaternion);
    v.segment<3>(kRate).setConstant(s.rate);
    return v;
}

double time_scale(const ScalingConfig& s, const ScenarioConfig& scenario)
{
    if (s.time > 0.0) {
        return s.time;
    }
    return std::max(scenario.tf_max - scenario.tf_min, 1.0);
}

// Collects rows of one cone block.
class BlockBuilder {
public:
    explicit BlockBuilder(int n) : n_(n) {}

    int row(double b = 0.0)
    {
        b_.push_back(b);
        return rows_++;
    }
    void add(int r, int col, double v)
    {
        if (v != 0.0) {
            trip_.emplace_back(r, col, v);
        }
    }
    void commit(ConicProgram& p, ConeType cone)
    {
        SparseMat A(rows_, n_);
        A.setFromTriplets(trip_.begin(), trip_.end());
        p.add_block(cone, std::move(A), Eigen::Map<Eigen::VectorXd>(b_.data(), rows_));
        trip_.clear();
        b_.clear();
        rows_ = 0;
    }

private:
    int n_;
    int rows_ = 0;
    std::vector<Eigen::Triplet<double>> trip_;
    std::vector<double> b_;
};

std::vector<int> forward_thrusters(const VehicleModel& v)
{
    std::vector<int> out;
    for (int i = 0; i < v.thruster_count(); ++i) {
        if (v.thrusters[static_cast<std::size_t>(i)].forward_facing) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<double> pulses_at(const PulseSchedule& s, int k)
{
    std::vector<double> out(static_cast<std::size_t>(s.dt.rows()));
    for (Eigen::Index i = 0; i < s.dt.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = s.dt(i, k);
    }
    return out;
}

}  // namespace

void PtrConfig::validate(int n_updates) const
{
    if (!(w_vc > 0.0 && w_tr > 0.0)) {
        throw std::invalid_argument("PTR weights w_vc and w_tr must be positive");
    }
    if (!(eps_stop > 0.0 && vc_tol > 0.0)) {
        throw std::invalid_argument("PTR stopping tolerances must be positive");
    }
    // max_iters below n_updates is allowed: such a run simply cannot
    // converge and ends with the iteration-limit message.
    (void)n_updates;
    if (max_iters < 1) {
        throw std::invalid_argument("PTR max_iters must be at least 1");
    }
    if (!(scaling.position > 0.0 && scaling.velocity > 0.0 && scaling.quaternion > 0.0 && scaling.rate > 0.0
          && scaling.time >= 0.0)) {
        throw std::invalid_argument("PTR scaling factors must be positive");
    }
}

std::vector<SegmentLinearization> discretize(const Trajectory& ref, const ScenarioConfig& scenario,
                                             const PropagationOptions& opts)
{
    const int N = ref.n_nodes();
    if (static_cast<int>(ref.states.size()) != N + 1) {
        throw std::invalid_argument("reference trajectory needs N_c + 1 node states");
    }
    const double tc = ref.tf / N;
    std::vector<SegmentLinearization> out(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        const ChaserState& xk = ref.states[static_cast<std::size_t>(k)];
        if (!xk.vector().allFinite()) {
            throw DivergenceError("reference node " + std::to_string(k) + " is not finite");
        }
        const std::vector<double> u = pulses_at(ref.schedule, k);
        const JumpJacobians J = linearize_jump(xk, u, scenario.vehicle);
        const ChaserState xplus = impulse_jump(xk, u, scenario.vehicle);
        const CoastLinearization lin = linearize_coast_segment(xplus, tc, scenario.vehicle, scenario.orbit, opts);
        SegmentLinearization& seg = out[static_cast<std::size_t>(k)];
        seg.A = lin.stm * J.d_state;
        seg.B = lin.stm * J.d_pulses;
        seg.S = lin.final_derivative / N;
        seg.x_end = lin.final_state;
        Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
        seg.c = seg.x_end - seg.A * xk.vector() - seg.B * uv - seg.S * ref.tf;
    }
    return out;
}

VariableLayout VariableLayout::build(int n_nodes, int n_rcs, int n_forward)
{
    VariableLayout L;
    L.n_nodes = n_nodes;
    L.n_rcs = n_rcs;
    L.n_forward = n_forward;
    const int N = n_nodes;
    int off = 0;
    auto take = [&off](int count) {
        const int start = off;
        off += count;
        return start;
    };
    L.x = take(kStateDim * (N + 1));
    L.dt = take(n_rcs * N);
    L.dt_ref = take(n_rcs * N);
    L.tf = take(1);
    L.dpf = take(3);
    L.dvf = take(3);
    L.dwf = take(3);
    L.nu_pos = take(kStateDim * N);
    L.nu_neg = take(kStateDim * N);
    L.mib_pos = take(n_rcs * N);
    L.mib_neg = take(n_rcs * N);
    L.wall = take(n_rcs * N);
    L.plume = take(n_forward * N);
    L.appch = take(N);
    L.eq = take(n_rcs * N);
    L.eta = take(N + 1);
    L.eta_tf = take(1);
    L.total = off;
    return L;
}

Subproblem build_subproblem(const Trajectory& ref, const std::vector<SegmentLinearization>& disc, double beta,
                            const ScenarioConfig& scenario, const PtrConfig& cfg, double w_tr)
{
    const VehicleModel& veh = scenario.vehicle;
    const int N = ref.n_nodes();
    const int m = veh.thruster_count();
    if (static_cast<int>(disc.size()) != N) {
        throw std::invalid_argument("discretization does not match the reference node count");
    }
    Subproblem sp;
    sp.forward = forward_thrusters(veh);
    const int nf = static_cast<int>(sp.forward.size());
    const VariableLayout L = VariableLayout::build(N, m, nf);
    sp.layout = L;
    const int n = L.total;

    const StateVec S = state_scale(cfg.scaling);
    const double dtm = veh.pulse_max;
    const double Ts = time_scale(cfg.scaling, scenario);
    const double tau_ref = ref.tf / Ts;

    ConicProgram& P = sp.program;
    P = ConicProgram(n);

    // Objective.
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            P.c(L.pulse(i, k)) = 1.0;
            P.c(L.eq + i + m * k) = scenario.w_eq * dtm / veh.pulse_min;
            P.c(L.mib_pos + i + m * k) = cfg.w_vc;
            P.c(L.mib_neg + i + m * k) = cfg.w_vc;
            P.c(L.wall + i + m * k) = cfg.w_vc;
        }
        for (int j = 0; j < kStateDim; ++j) {
            P.c(L.nu_pos + kStateDim * k + j) = cfg.w_vc;
            P.c(L.nu_neg + kStateDim * k + j) = cfg.w_vc;
        }
        for (int f = 0; f < nf; ++f) {
            P.c(L.plume + f + nf * k) = cfg.w_vc;
        }
        P.c(L.appch + k) = cfg.w_vc;
    }
    for (int k = 0; k <= N; ++k) {
        P.c(L.eta + k) = w_tr;
    }
    P.c(L.eta_tf) = w_tr;

    // Equalities.
    BlockBuilder eq(n);
    for (int k = 0; k < N; ++k) {
        const SegmentLinearization& seg = disc[static_cast<std::size_t>(k)];
        for (int r = 0; r < kStateDim; ++r) {
            const int row = eq.row(-seg.c(r) / S(r));
            eq.add(row, L.state(k + 1, r), 1.0);
            for (int j = 0; j < kStateDim; ++j) {
                eq.add(row, L.state(k, j), -seg.A(r, j) * S(j) / S(r));
            }
            for (int i = 0; i < m; ++i) {
                eq.add(row, L.pulse(i, k), -seg.B(r, i) * dtm / S(r));
            }
            eq.add(row, L.tf, -seg.S(r) * Ts / S(r));
            eq.add(row, L.nu_pos + kStateDim * k + r, -1.0);
            eq.add(row, L.nu_neg + kStateDim * k + r, 1.0);
        }
    }
    const StateVec x0 = scenario.x0.vector();
    for (int j = 0; j < kStateDim; ++j) {
        const int row = eq.row(-x0(j) / S(j));
        eq.add(row, L.state(0, j), 1.0);
    }
    const StateVec xf = scenario.xf.vector();
    const int relax_cols[3] = {L.dpf, L.dvf, L.dwf};
    const int blocks[3] = {kPos, kVel, kRate};
    for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
            const int j = blocks[b] + a;
            const int row = eq.row(-xf(j) / S(j));
            eq.add(row, L.state(N, j), 1.0);
            eq.add(row, relax_cols[b] + a, 1.0);
        }
    }
    eq.add(eq.row(), L.dpf, 1.0);

    // Smooth deadband curve, linearized in the reference pulse.
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            const double d = ref.schedule.dt_ref(i, k);
            const SdcEval e = mib_sdc(d, beta, veh);
            const int row = eq.row(-(e.dt - e.slope * d) / dtm);
            eq.add(row, L.pulse(i, k), 1.0);
            eq.add(row, L.pulse_ref(i, k), -e.slope);
            eq.add(row, L.mib_pos + i + m * k, -1.0);
            eq.add(row, L.mib_neg + i + m * k, 1.0);
        }
    }
    eq.commit(P, ConeType::Zero);

    // Inequalities.
    BlockBuilder ge(n);
    auto nonneg = [&](int col) { ge.add(ge.row(), col, 1.0); };
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            for (int col : {L.pulse(i, k), L.pulse_ref(i, k)}) {
                nonneg(col);
                ge.add(ge.row(1.0), col, -1.0);
            }
            nonneg(L.mib_pos + i + m * k);
            nonneg(L.mib_neg + i + m * k);
            nonneg(L.wall + i + m * k);
            // |dt - dt_ref| epigraph.
            int row = ge.row();
            ge.add(row, L.eq + i + m * k, 1.0);
            ge.add(row, L.pulse(i, k), -1.0);
            ge.add(row, L.pulse_ref(i, k), 1.0);
            row = ge.row();
            ge.add(row, L.eq + i + m * k, 1.0);
            ge.add(row, L.pulse(i, k), 1.0);
            ge.add(row, L.pulse_ref(i, k), -1.0);
        }
        for (int j = 0; j < kStateDim; ++j) {
            nonneg(L.nu_pos + kStateDim * k + j);
            nonneg(L.nu_neg + kStateDim * k + j);
        }
        for (int f = 0; f < nf; ++f) {
            nonneg(L.plume + f + nf * k);
        }
        nonneg(L.appch + k);
    }

    // Wall avoidance, linearized: buffer >= slope + slope' (dt_ref - d) - G.
    const double G = wall_threshold(beta, veh);
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            const double d = ref.schedule.dt_ref(i, k);
            const SdcEval e = mib_sdc(d, beta, veh);
            const int row = ge.row(-(e.slope - G - e.slope_deriv * d));
            ge.add(row, L.wall + i + m * k, 1.0);
            ge.add(row, L.pulse_ref(i, k), -e.slope_deriv * dtm);
        }
    }

    // Plume impingement at the firing node, in units of dt_max.
    for (int k = 0; k < N; ++k) {
        const Vec3 pbar = ref.states[static_cast<std::size_t>(k)].p;
        const ScalarWithGrad gate = plume_gate(pbar, beta, scenario);
        for (int f = 0; f < nf; ++f) {
            const int i = sp.forward[static_cast<std::size_t>(f)];
            const int row = ge.row(gate.value - gate.grad.dot(pbar));
            ge.add(row, L.plume + f + nf * k, 1.0);
            ge.add(row, L.pulse(i, k), -1.0);
            for (int a = 0; a < 3; ++a) {
                ge.add(row, L.state(k, kPos + a), gate.grad(a) * S(kPos + a));
            }
        }
    }

    // Approach cone at nodes 1..N.
    for (int k = 1; k <= N; ++k) {
        const Vec3 pbar = ref.states[static_cast<std::size_t>(k)].p;
        const ScalarWithGrad r = approach_cone_constraint(pbar, beta, scenario);
        const int row = ge.row(-(r.value - r.grad.dot(pbar)));
        ge.add(row, L.appch + (k - 1), 1.0);
        for (int a = 0; a < 3; ++a) {
            ge.add(row, L.state(k, kPos + a), -r.grad(a) * S(kPos + a));
        }
    }

    // Terminal relaxation boxes.
    auto box = [&](int col, double bound) {
        ge.add(ge.row(bound), col, -1.0);
        ge.add(ge.row(bound), col, 1.0);
    };
    for (int a = 1; a < 3; ++a) {
        box(L.dpf + a, scenario.tol_pf / S(kPos + a));
    }
    for (int a = 0; a < 3; ++a) {
        box(L.dvf + a, scenario.tol_vf / S(kVel + a));
        box(L.dwf + a, scenario.tol_wf / S(kRate + a));
    }

    // Final time bounds.
    ge.add(ge.row(-scenario.tf_min / Ts), L.tf, 1.0);
    ge.add(ge.row(scenario.tf_max / Ts), L.tf, -1.0);

    // Terminal attitude half-space.
    {
        const Quaternion qf = aligned_terminal_attitude(scenario.xf.q, ref.states.back().q);
        const Eigen::Vector4d qv = qf.vector();
        const int row = ge.row(-std::cos(0.5 * scenario.tol_qf));
        for (int a = 0; a < 4; ++a) {
            ge.add(row, L.state(N, kQuat + a), qv(a) * S(kQuat + a));
        }
    }
    ge.commit(P, ConeType::NonNeg);

    // Trust region: |delta_k|^2 <= eta_k as a rotated cone.
    for (int k = 0; k <= N; ++k) {
        BlockBuilder soc(n);
        int row = soc.row(1.0);
        soc.add(row, L.eta + k, 1.0);
        row = soc.row(-1.0);
        soc.add(row, L.eta + k, 1.0);
        const StateVec xs = ref.states[static_cast<std::size_t>(k)].vector().cwiseQuotient(S);
        for (int j = 0; j < kStateDim; ++j) {
            row = soc.row(-2.0 * xs(j));
            soc.add(row, L.state(k, j), 2.0);
        }
        if (k < N) {
            for (int i = 0; i < m; ++i) {
                row = soc.row(-2.0 * ref.schedule.dt(i, k) / dtm);
                soc.add(row, L.pulse(i, k), 2.0);
                row = soc.row(-2.0 * ref.schedule.dt_ref(i, k) / dtm);
                soc.add(row, L.pulse_ref(i, k), 2.0);
            }
        }
        soc.commit(P, ConeType::SOC);
    }
    {
        BlockBuilder soc(n);
        soc.add(soc.row(1.0), L.eta_tf, 1.0);
        soc.add(soc.row(-1.0), L.eta_tf, 1.0);
        soc.add(soc.row(-2.0 * tau_ref), L.tf, 2.0);
        soc.commit(P, ConeType::SOC);
    }
    return sp;
}

namespace {

Trajectory extract(const Subproblem& sp, const Eigen::VectorXd& z, const ScenarioConfig& scenario,
                   const PtrConfig& cfg)
{
    const VariableLayout& L = sp.layout;
    const StateVec S = state_scale(cfg.scaling);
    const double dtm = scenario.vehicle.pulse_max;
    const double Ts = time_scale(cfg.scaling, scenario);
    Trajectory t;
    const int N = L.n_nodes;
    const int m = L.n_rcs;
    t.states.resize(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
        StateVec x = z.segment<kStateDim>(L.state(k, 0)).cwiseProduct(S);
        const double qn = x.segment<4>(kQuat).norm();
        if (qn > 0.0) {
            x.segment<4>(kQuat) /= qn;
        }
        t.states[static_cast<std::size_t>(k)] = ChaserState::from_vector(x);
    }
    t.schedule = PulseSchedule::zeros(m, N);
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < m; ++i) {
            t.schedule.dt(i, k) = std::clamp(z(L.pulse(i, k)) * dtm, 0.0, dtm);
            t.schedule.dt_ref(i, k) = std::clamp(z(L.pulse_ref(i, k)) * dtm, 0.0, dtm);
        }
    }
    t.tf = std::clamp(z(L.tf) * Ts, scenario.tf_min, scenario.tf_max);
    t.relax.dp = z.segment<3>(L.dpf).cwiseProduct(S.segment<3>(kPos));
    t.relax.dv = z.segment<3>(L.dvf).cwiseProduct(S.segment<3>(kVel));
    t.relax.dw = z.segment<3>(L.dwf).cwiseProduct(S.segment<3>(kRate));
    const Quaternion qf = aligned_terminal_attitude(scenario.xf.q, t.states.back().q);
    t.relax.dq = qf.vector() - t.states.back().q.vector();
    return t;
}

}  // namespace

double scaled_deviation(const Trajectory& a, const Trajectory& b, const ScenarioConfig& scenario,
                        const PtrConfig& cfg)
{
    const StateVec S = state_scale(cfg.scaling);
    double dev = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        dev = std::max(dev, (a.states[k].vector() - b.states[k].vector()).cwiseQuotient(S).cwiseAbs().maxCoeff());
    }
    const double dtm = scenario.vehicle.pulse_max;
    if (a.schedule.dt.size() > 0) {
        dev = std::max(dev, (a.schedule.dt - b.schedule.dt).cwiseAbs().maxCoeff() / dtm);
        dev = std::max(dev, (a.schedule.dt_ref - b.schedule.dt_ref).cwiseAbs().maxCoeff() / dtm);
    }
    dev = std::max(dev, std::abs(a.tf - b.tf) / time_scale(cfg.scaling, scenario));
    return dev;
}

StepResult ptr_step(const Trajectory& ref, double beta, const ScenarioConfig& scenario, const PtrConfig& cfg)
{
    const auto t0 = Clock::now();
    const std::vector<SegmentLinearization> disc = discretize(ref, scenario, cfg.propagation);
    double w_tr = cfg.w_tr;
    std::string last_error;
    SolverStatus last_status = SolverStatus::NumericalError;
    double solve_time = 0.0;
    for (int attempt = 0; attempt <= cfg.max_rejections; ++attempt) {
        const Subproblem sp = build_subproblem(ref, disc, beta, scenario, cfg, w_tr);
        const auto errs = validate(sp.program);
        if (!errs.empty()) {
            last_error = "invalid subproblem: " + errs.front();
            w_tr *= cfg.rejection_inflation;
            continue;
        }
        const SolverResult res = solve(sp.program, cfg.solver);
        solve_time += res.solve_time;
        if (res.status != SolverStatus::Optimal) {
            last_status = res.status;
            last_error = std::string("subproblem solve failed: ") + status_name(res.status) + " (" + res.message + ")";
            w_tr *= cfg.rejection_inflation;
            continue;
        }
        StepResult out;
        out.traj = extract(sp, res.x, scenario, cfg);
        try {
            (void)discretize(out.traj, scenario, cfg.propagation);
        } catch (const DivergenceError& e) {
            last_error = std::string("candidate reference diverged: ") + e.what();
            w_tr *= cfg.rejection_inflation;
            continue;
        }
        const VariableLayout& L = sp.layout;
        const Eigen::VectorXd& z = res.x;
        IterationRecord& rec = out.record;
        rec.beta = beta;
        rec.cost = res.objective;
        rec.fuel = fuel_cost(out.traj.schedule, scenario.vehicle.pulse_max);
        rec.eq = eq_regularization(out.traj.schedule, scenario.w_eq, scenario.vehicle.pulse_min);
        rec.vc_norm = (z.segment(L.nu_pos, kStateDim * L.n_nodes) - z.segment(L.nu_neg, kStateDim * L.n_nodes))
                          .cwiseAbs()
                          .sum();
        const int mn = L.n_rcs * L.n_nodes;
        rec.buffer_norm = (z.segment(L.mib_pos, mn) - z.segment(L.mib_neg, mn)).cwiseAbs().sum()
                          + z.segment(L.wall, mn).cwiseAbs().sum()
                          + z.segment(L.plume, L.n_forward * L.n_nodes).cwiseAbs().sum()
                          + z.segment(L.appch, L.n_nodes).cwiseAbs().sum();
        rec.trust_region = z.segment(L.eta, L.n_nodes + 1).sum() + z(L.eta_tf);
        rec.max_deviation = scaled_deviation(out.traj, ref, scenario, cfg);
        rec.tf = out.traj.tf;
        rec.status = status_name(res.status);
        rec.solver_iterations = res.iterations;
        rec.rejections = attempt;
        rec.solve_time = solve_time;
        rec.wall_time = seconds_since(t0);
        return out;
    }
    throw SolverFailure(last_error, last_status);
}

SolveOutput solve_rendezvous(const ScenarioConfig& scenario, const HomotopyParams& homotopy, const PtrConfig& cfg)
{
    return solve_rendezvous(scenario, homotopy, cfg, initial_guess(scenario));
}

SolveOutput solve_rendezvous(const ScenarioConfig& scenario, const HomotopyParams& homotopy, const PtrConfig& cfg,
                             const Trajectory& guess)
{
    scenario.validate();
    homotopy.validate();
    cfg.validate(homotopy.n_updates);

    SolveOutput out;
    Trajectory ref = guess;
    ContinuationState state;
    bool pending_update = true;  // non-embedded driver: update after each converged PTR solve
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        state.iteration = iter;
        bool updated = false;
        if (cfg.embedded) {
            if (iter == 1 || (state.cost_history.size() >= 2 && update_decision(state, homotopy))) {
                update_rule(state, homotopy);
                updated = true;
            }
        } else if (pending_update) {
            update_rule(state, homotopy);
            updated = true;
            pending_update = false;
        }

        StepResult step;
        try {
            step = ptr_step(ref, state.beta, scenario, cfg);
        } catch (const SolverFailure& e) {
            out.message = std::string("iteration ") + std::to_string(iter) + ": " + e.what();
            out.traj = ref;
            out.updates = state.updates;
            return out;
        } catch (const DivergenceError& e) {
            out.message = std::string("iteration ") + std::to_string(iter) + ": reference diverged: " + e.what();
            out.traj = ref;
            out.updates = state.updates;
            return out;
        }
        step.record.iteration = iter;
        step.record.updates = state.updates;
        step.record.beta_updated = updated;
        state.cost_history.push_back(step.record.cost);
        out.log.push_back(step.record);

        const bool test = step.record.max_deviation <= cfg.eps_stop && step.record.vc_norm <= cfg.vc_tol
                          && step.record.buffer_norm <= cfg.vc_tol;
        ref = std::move(step.traj);
        if (test && state.updates == homotopy.n_updates) {
            out.converged = true;
            out.traj = ref;
            out.updates = state.updates;
            out.message = "converged";
            return out;
        }
        if (!cfg.embedded && test) {
            pending_update = true;
        }
    }
    out.traj = ref;
    out.updates = state.updates;
    out.message = "iteration limit reached without convergence";
    return out;
}

}  // namespace scpdock

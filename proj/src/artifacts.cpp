#include "scpdock/artifacts.hpp"

#include "scpdock/conic_program.hpp"
#include "scpdock/smooth_logic.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace scpdock {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArtifactError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw ArtifactError("failed while writing '" + path.string() + "'");
    }
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArtifactError("missing artifact '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr const char* kStateHeader = "px,py,pz,vx,vy,vz,qx,qy,qz,qw,wx,wy,wz";

void append_state(std::string& line, const ChaserState& x)
{
    const StateVec v = x.vector();
    for (int j = 0; j < kStateDim; ++j) {
        line += ',';
        line += fmt(v(j));
    }
}

ordered_json vec_json(const Eigen::VectorXd& v)
{
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

ordered_json state_json(const ChaserState& x)
{
    return {{"position", vec_json(x.p)},
            {"velocity", vec_json(x.v)},
            {"attitude", vec_json(x.q.vector())},
            {"rate", vec_json(x.w)}};
}

// Splits a CSV body into rows of numbers after checking the header.
std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& header)
{
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ArtifactError("'" + path.string() + "' has an unexpected header");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ArtifactError("'" + path.string() + "' has a non-numeric cell '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::string kTrajectoryHeader = std::string("node,t,") + kStateHeader;
const std::string kScheduleHeader = "node,t,thruster,dt,dt_ref,forward_facing";
const std::string kDenseHeader = std::string("segment,t,") + kStateHeader;

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj)
{
    std::string text = kTrajectoryHeader + "\n";
    const double tc = traj.node_spacing();
    const std::size_t last = traj.states.size() - 1;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        // The last row carries tf exactly; load_run reads it back from there.
        const double t = k == last ? traj.tf : tc * static_cast<double>(k);
        std::string line = std::to_string(k) + "," + fmt(t);
        append_state(line, traj.states[k]);
        text += line + "\n";
    }
    write_file(path, text);
}

void write_schedule_csv(const std::string& path, const Trajectory& traj, const VehicleModel& vehicle)
{
    std::string text = kScheduleHeader + "\n";
    const double tc = traj.node_spacing();
    for (int k = 0; k < traj.n_nodes(); ++k) {
        for (int i = 0; i < vehicle.thruster_count(); ++i) {
            text += std::to_string(k) + "," + fmt(tc * k) + "," + std::to_string(i) + "," + fmt(traj.schedule.dt(i, k))
                    + "," + fmt(traj.schedule.dt_ref(i, k)) + ","
                    + (vehicle.thrusters[static_cast<std::size_t>(i)].forward_facing ? "1" : "0") + "\n";
        }
    }
    write_file(path, text);
}

std::string iterations_json(const std::vector<IterationRecord>& log)
{
    ordered_json records = ordered_json::array();
    for (const IterationRecord& r : log) {
        records.push_back({{"iteration", r.iteration},
                           {"updates", r.updates},
                           {"beta", r.beta},
                           {"beta_updated", r.beta_updated},
                           {"cost", r.cost},
                           {"fuel", r.fuel},
                           {"eq", r.eq},
                           {"trust_region", r.trust_region},
                           {"vc_norm", r.vc_norm},
                           {"buffer_norm", r.buffer_norm},
                           {"max_deviation", r.max_deviation},
                           {"tf", r.tf},
                           {"status", r.status},
                           {"solver_iterations", r.solver_iterations},
                           {"rejections", r.rejections},
                           {"solve_time", r.solve_time},
                           {"wall_time", r.wall_time}});
    }
    ordered_json doc = {{"schema_version", kArtifactSchemaVersion}, {"records", records}};
    return doc.dump(2) + "\n";
}

std::string verification_json(const VerifyReport& report, const VerifyTolerances& tol)
{
    ordered_json checks = ordered_json::array();
    for (const VerifyCheck& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"worst", c.worst},
                          {"tolerance", c.tolerance},
                          {"unit", c.unit},
                          {"where", c.where}});
    }
    ordered_json doc = {
        {"schema_version", kArtifactSchemaVersion},
        {"passed", report.passed()},
        {"settings",
         {{"mib_tolerance_s", tol.mib},
          {"plume_pulse_tolerance_s", tol.plume_pulse},
          {"sphere_shell_m", tol.shell},
          {"cone_angle_tolerance_deg", tol.cone_angle},
          {"samples_per_segment", tol.samples},
          {"note", "exact discrete logic on a nonlinear re-simulation; the smooth model is exact only as beta grows "
                   "without bound, hence the tolerances"}}},
        {"checks", checks}};
    return doc.dump(2) + "\n";
}

void write_run_artifacts(const std::string& dir, const RunConfig& cfg, const SolveOutput& out)
{
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
        throw ArtifactError("cannot create output directory '" + dir + "': " + ec.message());
    }
    const ScenarioConfig& sc = cfg.scenario;
    const Trajectory& t = out.traj;

    write_file(root / "config.yaml", dump_config(cfg));

    ordered_json scenario = {{"schema_version", kArtifactSchemaVersion},
                             {"initial", state_json(sc.x0)},
                             {"terminal", state_json(sc.xf)},
                             {"r_plume", sc.r_plume},
                             {"r_appch", sc.r_appch},
                             {"theta_appch", sc.theta_appch},
                             {"tf_bounds", {sc.tf_min, sc.tf_max}},
                             {"n_nodes", sc.n_nodes},
                             {"mean_motion", sc.orbit.mean_motion},
                             {"pulse_min", sc.vehicle.pulse_min},
                             {"pulse_max", sc.vehicle.pulse_max},
                             {"thrust", sc.vehicle.thrust},
                             {"thruster_count", sc.vehicle.thruster_count()}};
    write_file(root / "scenario.json", scenario.dump(2) + "\n");

    write_trajectory_csv((root / "trajectory.csv").string(), t);
    write_schedule_csv((root / "schedule.csv").string(), t, sc.vehicle);

    const Simulation sim = simulate(sc.x0, t.schedule, t.tf, sc.vehicle, sc.orbit, cfg.dense_samples);
    std::string dense = kDenseHeader + "\n";
    for (std::size_t j = 0; j < sim.x.size(); ++j) {
        std::string line = std::to_string(sim.segment[j]) + "," + fmt(sim.t[j]);
        append_state(line, sim.x[j]);
        dense += line + "\n";
    }
    write_file(root / "dense.csv", dense);

    write_file(root / "iterations.json", iterations_json(out.log));

    const double fuel = fuel_cost(t.schedule, sc.vehicle.pulse_max);
    double solve_time = 0.0;
    for (const IterationRecord& r : out.log) {
        solve_time += r.solve_time;
    }
    ordered_json run = {
        {"schema_version", kArtifactSchemaVersion},
        {"converged", out.converged},
        {"message", out.message},
        {"iterations", out.log.size()},
        {"updates", out.updates},
        {"tf", t.tf},
        {"fuel_cost", fuel},
        {"pulse_sum_s", t.schedule.dt.sum()},
        {"impulse_Ns", sc.vehicle.thrust * t.schedule.dt.sum()},
        {"eq_regularization", eq_regularization(t.schedule, sc.w_eq, sc.vehicle.pulse_min)},
        {"terminal_relaxation",
         {{"position", vec_json(t.relax.dp)}, {"velocity", vec_json(t.relax.dv)}, {"rate", vec_json(t.relax.dw)}}},
        {"solver_backend", solver_backend_name()},
        {"cumulative_solve_time", solve_time}};
    write_file(root / "run.json", run.dump(2) + "\n");
}

void write_verification(const std::string& dir, const VerifyReport& report, const VerifyTolerances& tol)
{
    write_file(fs::path(dir) / "verification.json", verification_json(report, tol));
}

LoadedRun load_run(const std::string& dir)
{
    const fs::path root(dir);
    LoadedRun run;
    const fs::path cfg_path = root / "config.yaml";
    try {
        run.cfg = parse_config(read_file(cfg_path));
    } catch (const ConfigError& e) {
        throw ArtifactError("'" + cfg_path.string() + "': " + e.what());
    }
    const int m = run.cfg.scenario.vehicle.thruster_count();

    const auto traj_rows = read_csv(root / "trajectory.csv", kTrajectoryHeader);
    if (traj_rows.size() < 2) {
        throw ArtifactError("'trajectory.csv' needs at least two nodes");
    }
    const int N = static_cast<int>(traj_rows.size()) - 1;
    Trajectory& t = run.traj;
    for (const auto& row : traj_rows) {
        if (row.size() != 2 + kStateDim) {
            throw ArtifactError("'trajectory.csv' has a row with the wrong column count");
        }
        StateVec x;
        for (int j = 0; j < kStateDim; ++j) {
            x(j) = row[static_cast<std::size_t>(2 + j)];
        }
        t.states.push_back(ChaserState::from_vector(x));
    }
    t.tf = traj_rows.back()[1];

    t.schedule = PulseSchedule::zeros(m, N);
    const auto sched_rows = read_csv(root / "schedule.csv", kScheduleHeader);
    for (const auto& row : sched_rows) {
        if (row.size() != 6) {
            throw ArtifactError("'schedule.csv' has a row with the wrong column count");
        }
        const int k = static_cast<int>(row[0]);
        const int i = static_cast<int>(row[2]);
        if (k < 0 || k >= N || i < 0 || i >= m) {
            throw ArtifactError("'schedule.csv' references node " + std::to_string(k) + " thruster "
                                + std::to_string(i) + " outside the run");
        }
        t.schedule.dt(i, k) = row[3];
        t.schedule.dt_ref(i, k) = row[4];
    }
    return run;
}

std::string smoothing_comparison_csv(const HomotopyParams& homotopy, int grid_points)
{
    if (grid_points < 2) {
        throw std::invalid_argument("smoothing grid needs at least two points");
    }
    std::string text = "beta,g_hat,logit_shifted,logit_unshifted,rashs,one_minus_rashs,csc\n";
    for (double beta : beta_schedule(homotopy)) {
        // Anchor at the top of the grid, as for the scenario gates.
        const SmoothOrGate gate{1.0, Eigen::VectorXd::Constant(1, 1.0), beta};
        for (int j = 0; j < grid_points; ++j) {
            const double g = -1.0 + 2.0 * j / (grid_points - 1);
            const Eigen::VectorXd gv = Eigen::VectorXd::Constant(1, g);
            const double rashs = rashs_and(gv, beta);
            text += fmt(beta) + "," + fmt(g) + "," + fmt(or_gate(gv, gate).value) + ","
                    + fmt(or_gate_unshifted(gv, gate)) + "," + fmt(rashs) + "," + fmt(1.0 - rashs) + ","
                    + fmt(csc_and(gv, beta)) + "\n";
        }
    }
    return text;
}

}  // namespace scpdock

// Command-line front end: solve, verify, sweep-trig, compare-smoothing.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 the run completed
// but did not converge (solve, sweep-trig) or failed verification (verify).

#include "scpdock/artifacts.hpp"
#include "scpdock/config.hpp"
#include "scpdock/ptr.hpp"
#include "scpdock/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace scpdock;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNotConverged = 2;

void print_record(const IterationRecord& r)
{
    std::fprintf(stderr, "%3d  L=%2d  beta=%-9.4g J=%-12.6g fuel=%-9.5g |nu|=%-9.2e dev=%-9.2e tf=%-7.1f %s\n",
                 r.iteration, r.updates, r.beta, r.cost, r.fuel, r.vc_norm, r.max_deviation, r.tf, r.status.c_str());
}

int cmd_solve(const std::string& config_path, const std::string& out_dir, int max_iters)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (max_iters > 0) {
            cfg.ptr.max_iters = max_iters;
            cfg.ptr.validate(cfg.homotopy.n_updates);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kError;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const SolveOutput out = solve_rendezvous(cfg.scenario, cfg.homotopy, cfg.ptr);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const IterationRecord& r : out.log) {
        print_record(r);
    }
    try {
        write_run_artifacts(out_dir, cfg, out);
    } catch (const ArtifactError& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kError;
    }
    std::fprintf(stderr, "%s after %zu iterations (L=%d, %.1f s); fuel %.5g, impulse %.6g N s\n", out.message.c_str(),
                 out.log.size(), out.updates, wall, fuel_cost(out.traj.schedule, cfg.scenario.vehicle.pulse_max),
                 cfg.scenario.vehicle.thrust * out.traj.schedule.dt.sum());
    return out.converged ? kOk : kNotConverged;
}

int cmd_verify(const std::string& run_dir)
{
    LoadedRun run;
    try {
        run = load_run(run_dir);
    } catch (const ArtifactError& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return kError;
    }
    const VerifyTolerances tol;
    VerifyReport rep;
    try {
        rep = verify_trajectory(run.cfg.scenario, run.traj, tol);
        write_verification(run_dir, rep, tol);
    } catch (const std::exception& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return kError;
    }
    for (const VerifyCheck& c : rep.checks) {
        std::fprintf(stderr, "%-4s %-22s worst %-12.5g tol %-10.4g %-6s at %s\n", c.passed ? "PASS" : "FAIL",
                     c.name.c_str(), c.worst, c.tolerance, c.unit.c_str(), c.where.c_str());
    }
    return rep.passed() ? kOk : kNotConverged;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& values, const std::string& out_path)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kError;
    }
    std::string csv = "beta_trig,iterations,converged,updates,fuel_cost,impulse_Ns,solve_time_s\n";
    bool all = true;
    for (double v : values) {
        HomotopyParams h = cfg.homotopy;
        h.beta_trig = v;
        try {
            h.validate();
        } catch (const std::invalid_argument& e) {
            std::cerr << "config error: beta_trig " << v << ": " << e.what() << "\n";
            return kError;
        }
        const SolveOutput out = solve_rendezvous(cfg.scenario, h, cfg.ptr);
        double solve_time = 0.0;
        for (const IterationRecord& r : out.log) {
            solve_time += r.solve_time;
        }
        char line[256];
        std::snprintf(line, sizeof line, "%.17g,%zu,%d,%d,%.17g,%.17g,%.6g\n", v, out.log.size(),
                      out.converged ? 1 : 0, out.updates, fuel_cost(out.traj.schedule, cfg.scenario.vehicle.pulse_max),
                      cfg.scenario.vehicle.thrust * out.traj.schedule.dt.sum(), solve_time);
        csv += line;
        std::fprintf(stderr, "beta_trig=%g: %s after %zu iterations\n", v, out.message.c_str(), out.log.size());
        all = all && out.converged;
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(out_path);
        if (!(f << csv)) {
            std::cerr << "output error: cannot write '" << out_path << "'\n";
            return kError;
        }
    }
    return all ? kOk : kNotConverged;
}

int cmd_compare(const std::string& out_dir, const std::string& config_path, int points)
{
    HomotopyParams h;
    if (!config_path.empty()) {
        try {
            h = load_config(config_path).homotopy;
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kError;
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream f(std::filesystem::path(out_dir) / "smoothing.csv");
    if (ec || !(f << smoothing_comparison_csv(h, points))) {
        std::cerr << "output error: cannot write into '" << out_dir << "'\n";
        return kError;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rendezvous trajectory optimization with embedded continuation"};
    app.require_subcommand(1);

    std::string config, out, run, sweep_out;
    int max_iters = 0;
    int points = 201;
    std::vector<double> values;

    auto* solve = app.add_subcommand("solve", "Solve a rendezvous scenario and write run artifacts");
    solve->add_option("--config", config, "YAML configuration")->required();
    solve->add_option("--out", out, "Output directory")->required();
    solve->add_option("--max-iters", max_iters, "Override ptr.max_iters");

    auto* verify = app.add_subcommand("verify", "Check a run against the exact discrete logic");
    verify->add_option("--run", run, "Run directory written by solve")->required();

    auto* sweep = app.add_subcommand("sweep-trig", "Solve once per beta_trig value and tabulate the results");
    sweep->add_option("--config", config, "YAML configuration")->required();
    sweep->add_option("--values", values, "beta_trig values")->required()->delimiter(',');
    sweep->add_option("--out", sweep_out, "CSV path (default: stdout)");

    auto* compare = app.add_subcommand("compare-smoothing", "Tabulate logit, RASHS and CSC gate values");
    compare->add_option("--out", out, "Output directory")->required();
    compare->add_option("--config", config, "YAML configuration for the homotopy schedule");
    compare->add_option("--points", points, "Grid points over [-1, 1]")->check(CLI::Range(2, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*solve) {
            return cmd_solve(config, out, max_iters);
        }
        if (*verify) {
            return cmd_verify(run);
        }
        if (*sweep) {
            return cmd_sweep(config, values, sweep_out);
        }
        return cmd_compare(out, config, points);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}

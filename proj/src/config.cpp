#include "scpdock/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace scpdock {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Read access to one mapping that remembers which keys were consumed.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
    {
        if (!node_.IsMap()) {
            throw ConfigError("'" + where() + "' must be a mapping");
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node raw(const std::string& key)
    {
        used_.insert(key);
        YAML::Node n = node_[key];
        if (!n) {
            throw ConfigError("missing required key '" + join(path_, key) + "'");
        }
        return n;
    }

    Section sub(const std::string& key) { return {raw(key), join(path_, key)}; }

    std::optional<Section> optional_sub(const std::string& key)
    {
        if (!has(key)) {
            used_.insert(key);
            return std::nullopt;
        }
        return sub(key);
    }

    double number(const std::string& key) { return as<double>(raw(key), key); }
    int integer(const std::string& key) { return as<int>(raw(key), key); }
    bool flag(const std::string& key) { return as<bool>(raw(key), key); }

    void get(const std::string& key, double& out)
    {
        if (has(key)) {
            out = number(key);
        }
        used_.insert(key);
    }
    void get(const std::string& key, int& out)
    {
        if (has(key)) {
            out = integer(key);
        }
        used_.insert(key);
    }
    void get(const std::string& key, bool& out)
    {
        if (has(key)) {
            out = flag(key);
        }
        used_.insert(key);
    }

    Eigen::VectorXd vector(const std::string& key, int size)
    {
        const YAML::Node n = raw(key);
        if (!n.IsSequence() || static_cast<int>(n.size()) != size) {
            throw ConfigError("'" + join(path_, key) + "' must be a list of " + std::to_string(size) + " numbers");
        }
        Eigen::VectorXd v(size);
        for (int i = 0; i < size; ++i) {
            v(i) = as<double>(n[static_cast<std::size_t>(i)], key);
        }
        return v;
    }

    Vec3 vec3(const std::string& key) { return vector(key, 3); }

    Quaternion quaternion(const std::string& key)
    {
        const Eigen::Vector4d v = vector(key, 4);
        if (std::abs(v.norm() - 1.0) > 1e-6) {
            throw ConfigError("'" + join(path_, key) + "' must be a unit quaternion [x, y, z, w]");
        }
        return Quaternion::from_vector(v.normalized());
    }

    /// Rejects keys that were never read.
    void finish() const
    {
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (used_.count(key) == 0) {
                throw ConfigError("unknown key '" + join(path_, key) + "'");
            }
        }
    }

    std::string where() const { return path_.empty() ? "<root>" : path_; }

private:
    template <class T>
    T as(const YAML::Node& n, const std::string& key) const
    {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError("'" + join(path_, key) + "' has the wrong type");
        }
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<Thruster> parse_thrusters(Section& vehicle)
{
    const YAML::Node n = vehicle.raw("thrusters");
    if (n.IsScalar() && n.as<std::string>() == "default") {
        return default_thrusters();
    }
    if (!n.IsSequence() || n.size() == 0) {
        throw ConfigError("'vehicle.thrusters' must be 'default' or a non-empty list");
    }
    std::vector<Thruster> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        Section t(n[i], "vehicle.thrusters[" + std::to_string(i) + "]");
        Thruster th;
        th.position = t.vec3("position");
        th.direction = t.vec3("direction");
        if (th.direction.norm() < 1e-12) {
            throw ConfigError("'" + t.where() + ".direction' must be nonzero");
        }
        th.direction.normalize();
        th.forward_facing = t.flag("forward_facing");
        t.finish();
        out.push_back(th);
    }
    return out;
}

void parse_vehicle(Section s, VehicleModel& v)
{
    v.mass = s.number("mass");
    const YAML::Node in = s.raw("inertia");
    if (!in.IsSequence() || in.size() != 3) {
        throw ConfigError("'vehicle.inertia' must be a 3x3 list of rows");
    }
    for (std::size_t r = 0; r < 3; ++r) {
        if (!in[r].IsSequence() || in[r].size() != 3) {
            throw ConfigError("'vehicle.inertia' must be a 3x3 list of rows");
        }
        for (std::size_t c = 0; c < 3; ++c) {
            v.inertia(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = in[r][c].as<double>();
        }
    }
    v.thrust = s.number("thrust");
    v.pulse_min = s.number("pulse_min");
    v.pulse_max = s.number("pulse_max");
    v.pulse_buffer = s.number("pulse_buffer");
    v.thrusters = parse_thrusters(s);
    s.finish();
}

void parse_scenario(Section s, ScenarioConfig& sc)
{
    sc.r_plume = s.number("r_plume");
    sc.r_appch = s.number("r_appch");
    sc.theta_appch = s.number("theta_appch_deg") * kDeg;
    sc.plume_gmax = s.number("plume_gmax");
    sc.appch_gmax = s.number("appch_gmax");

    Section init = s.sub("initial");
    sc.x0.p = init.vec3("position");
    sc.x0.v = init.vec3("velocity");
    sc.x0.q = init.quaternion("attitude");
    sc.x0.w = init.vec3("rate_deg_s") * kDeg;
    init.finish();

    Section dock = s.sub("docking");
    sc.q_lock = dock.quaternion("q_lock");
    sc.q_dp = dock.quaternion("q_dp");
    sc.p_dp = dock.vec3("p_dp");
    dock.finish();

    Section fin = s.sub("terminal");
    sc.xf.v = fin.vec3("velocity");
    sc.xf.w = fin.vec3("rate_deg_s") * kDeg;
    sc.tol_pf = fin.number("tol_position");
    sc.tol_vf = fin.number("tol_velocity");
    sc.tol_qf = fin.number("tol_attitude_deg") * kDeg;
    sc.tol_wf = fin.number("tol_rate_deg_s") * kDeg;
    fin.finish();
    sc.apply_terminal_pose();

    sc.tf_min = s.number("tf_min");
    sc.tf_max = s.number("tf_max");
    sc.n_nodes = s.integer("n_nodes");
    sc.w_eq = s.number("w_eq");
    s.finish();
}

void parse_homotopy(Section s, HomotopyParams& h)
{
    s.get("epsilon", h.epsilon);
    s.get("delta0", h.delta0);
    s.get("delta1", h.delta1);
    s.get("n_updates", h.n_updates);
    s.get("beta_worse", h.beta_worse);
    s.get("beta_trig", h.beta_trig);
    s.finish();
}

void parse_ptr(Section s, PtrConfig& p)
{
    s.get("w_vc", p.w_vc);
    s.get("w_tr", p.w_tr);
    s.get("eps_stop", p.eps_stop);
    s.get("vc_tol", p.vc_tol);
    s.get("max_iters", p.max_iters);
    s.get("embedded", p.embedded);
    s.get("max_rejections", p.max_rejections);
    s.get("rejection_inflation", p.rejection_inflation);
    if (auto sc = s.optional_sub("scaling")) {
        sc->get("position", p.scaling.position);
        sc->get("velocity", p.scaling.velocity);
        sc->get("quaternion", p.scaling.quaternion);
        sc->get("rate", p.scaling.rate);
        sc->get("time", p.scaling.time);
        sc->finish();
    }
    s.get("rk4_max_step", p.propagation.max_step);
    s.finish();
}

void parse_solver(Section s, SolverOptions& o)
{
    s.get("max_iters", o.max_iters);
    s.get("feastol", o.feastol);
    s.get("abstol", o.abstol);
    s.get("reltol", o.reltol);
    s.get("validate_tol", o.validate_tol);
    s.finish();
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML parse error: ") + e.what());
    }
    if (!root || root.IsNull()) {
        throw ConfigError("configuration is empty");
    }
    RunConfig cfg;
    Section top(root, "");
    int schema = 1;
    top.get("schema_version", schema);
    if (schema != 1) {
        throw ConfigError("unsupported config schema_version " + std::to_string(schema) + " (expected 1)");
    }
    parse_vehicle(top.sub("vehicle"), cfg.scenario.vehicle);

    Section orbit = top.sub("orbit");
    const bool has_alt = orbit.has("altitude");
    const bool has_n = orbit.has("mean_motion");
    if (has_alt == has_n) {
        throw ConfigError("'orbit' needs exactly one of 'altitude' or 'mean_motion'");
    }
    if (has_alt) {
        cfg.scenario.orbit_altitude = orbit.number("altitude");
        cfg.scenario.orbit = OrbitModel::circular(cfg.scenario.orbit_altitude);
    } else {
        cfg.scenario.orbit.mean_motion = orbit.number("mean_motion");
    }
    orbit.finish();

    parse_scenario(top.sub("scenario"), cfg.scenario);
    if (auto h = top.optional_sub("homotopy")) {
        parse_homotopy(*h, cfg.homotopy);
    }
    if (auto p = top.optional_sub("ptr")) {
        parse_ptr(*p, cfg.ptr);
    }
    if (auto s = top.optional_sub("solver")) {
        parse_solver(*s, cfg.ptr.solver);
    }
    if (auto o = top.optional_sub("output")) {
        o->get("dense_samples", cfg.dense_samples);
        o->finish();
    }
    top.finish();

    try {
        cfg.scenario.validate();
        cfg.homotopy.validate();
        cfg.ptr.validate(cfg.homotopy.n_updates);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (cfg.dense_samples < 1) {
        throw ConfigError("'output.dense_samples' must be at least 1");
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

void emit_vec(YAML::Emitter& e, const Eigen::VectorXd& v)
{
    e << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        e << v(i);
    }
    e << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const RunConfig& cfg)
{
    const ScenarioConfig& sc = cfg.scenario;
    const VehicleModel& v = sc.vehicle;
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "schema_version" << YAML::Value << 1;

    e << YAML::Key << "vehicle" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "mass" << YAML::Value << v.mass;
    e << YAML::Key << "inertia" << YAML::Value << YAML::BeginSeq;
    for (int r = 0; r < 3; ++r) {
        emit_vec(e, v.inertia.row(r).transpose());
    }
    e << YAML::EndSeq;
    e << YAML::Key << "thrust" << YAML::Value << v.thrust;
    e << YAML::Key << "pulse_min" << YAML::Value << v.pulse_min;
    e << YAML::Key << "pulse_max" << YAML::Value << v.pulse_max;
    e << YAML::Key << "pulse_buffer" << YAML::Value << v.pulse_buffer;
    e << YAML::Key << "thrusters" << YAML::Value << YAML::BeginSeq;
    for (const Thruster& t : v.thrusters) {
        e << YAML::BeginMap;
        e << YAML::Key << "position" << YAML::Value;
        emit_vec(e, t.position);
        e << YAML::Key << "direction" << YAML::Value;
        emit_vec(e, t.direction);
        e << YAML::Key << "forward_facing" << YAML::Value << t.forward_facing;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;

    e << YAML::Key << "orbit" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "mean_motion" << YAML::Value << sc.orbit.mean_motion;
    e << YAML::EndMap;

    e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "r_plume" << YAML::Value << sc.r_plume;
    e << YAML::Key << "r_appch" << YAML::Value << sc.r_appch;
    e << YAML::Key << "theta_appch_deg" << YAML::Value << sc.theta_appch / kDeg;
    e << YAML::Key << "plume_gmax" << YAML::Value << sc.plume_gmax;
    e << YAML::Key << "appch_gmax" << YAML::Value << sc.appch_gmax;
    e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "position" << YAML::Value;
    emit_vec(e, sc.x0.p);
    e << YAML::Key << "velocity" << YAML::Value;
    emit_vec(e, sc.x0.v);
    e << YAML::Key << "attitude" << YAML::Value;
    emit_vec(e, sc.x0.q.vector());
    e << YAML::Key << "rate_deg_s" << YAML::Value;
    emit_vec(e, sc.x0.w / kDeg);
    e << YAML::EndMap;
    e << YAML::Key << "docking" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "q_lock" << YAML::Value;
    emit_vec(e, sc.q_lock.vector());
    e << YAML::Key << "q_dp" << YAML::Value;
    emit_vec(e, sc.q_dp.vector());
    e << YAML::Key << "p_dp" << YAML::Value;
    emit_vec(e, sc.p_dp);
    e << YAML::EndMap;
    e << YAML::Key << "terminal" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "velocity" << YAML::Value;
    emit_vec(e, sc.xf.v);
    e << YAML::Key << "rate_deg_s" << YAML::Value;
    emit_vec(e, sc.xf.w / kDeg);
    e << YAML::Key << "tol_position" << YAML::Value << sc.tol_pf;
    e << YAML::Key << "tol_velocity" << YAML::Value << sc.tol_vf;
    e << YAML::Key << "tol_attitude_deg" << YAML::Value << sc.tol_qf / kDeg;
    e << YAML::Key << "tol_rate_deg_s" << YAML::Value << sc.tol_wf / kDeg;
    e << YAML::EndMap;
    e << YAML::Key << "tf_min" << YAML::Value << sc.tf_min;
    e << YAML::Key << "tf_max" << YAML::Value << sc.tf_max;
    e << YAML::Key << "n_nodes" << YAML::Value << sc.n_nodes;
    e << YAML::Key << "w_eq" << YAML::Value << sc.w_eq;
    e << YAML::EndMap;

    const HomotopyParams& h = cfg.homotopy;
    e << YAML::Key << "homotopy" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "epsilon" << YAML::Value << h.epsilon;
    e << YAML::Key << "delta0" << YAML::Value << h.delta0;
    e << YAML::Key << "delta1" << YAML::Value << h.delta1;
    e << YAML::Key << "n_updates" << YAML::Value << h.n_updates;
    e << YAML::Key << "beta_worse" << YAML::Value << h.beta_worse;
    e << YAML::Key << "beta_trig" << YAML::Value << h.beta_trig;
    e << YAML::EndMap;

    const PtrConfig& p = cfg.ptr;
    e << YAML::Key << "ptr" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "w_vc" << YAML::Value << p.w_vc;
    e << YAML::Key << "w_tr" << YAML::Value << p.w_tr;
    e << YAML::Key << "eps_stop" << YAML::Value << p.eps_stop;
    e << YAML::Key << "vc_tol" << YAML::Value << p.vc_tol;
    e << YAML::Key << "max_iters" << YAML::Value << p.max_iters;
    e << YAML::Key << "embedded" << YAML::Value << p.embedded;
    e << YAML::Key << "max_rejections" << YAML::Value << p.max_rejections;
    e << YAML::Key << "rejection_inflation" << YAML::Value << p.rejection_inflation;
    e << YAML::Key << "rk4_max_step" << YAML::Value << p.propagation.max_step;
    e << YAML::Key << "scaling" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "position" << YAML::Value << p.scaling.position;
    e << YAML::Key << "velocity" << YAML::Value << p.scaling.velocity;
    e << YAML::Key << "quaternion" << YAML::Value << p.scaling.quaternion;
    e << YAML::Key << "rate" << YAML::Value << p.scaling.rate;
    e << YAML::Key << "time" << YAML::Value << p.scaling.time;
    e << YAML::EndMap << YAML::EndMap;

    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "max_iters" << YAML::Value << p.solver.max_iters;
    e << YAML::Key << "feastol" << YAML::Value << p.solver.feastol;
    e << YAML::Key << "abstol" << YAML::Value << p.solver.abstol;
    e << YAML::Key << "reltol" << YAML::Value << p.solver.reltol;
    e << YAML::Key << "validate_tol" << YAML::Value << p.solver.validate_tol;
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dense_samples" << YAML::Value << cfg.dense_samples;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace scpdock

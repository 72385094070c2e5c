#include "mfldp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mfldp/meanfield.hpp"
#include "mfldp/output.hpp"
#include "mfldp/sgd.hpp"

namespace mfldp {

using nlohmann::json;

Experiment experiment_from_name(const std::string& name) {
    if (name == "simulate") return Experiment::simulate;
    if (name == "meanfield") return Experiment::meanfield;
    if (name == "lln") return Experiment::lln;
    if (name == "rate_I") return Experiment::rate_I;
    if (name == "rate_J") return Experiment::rate_J;
    if (name == "importance") return Experiment::importance;
    if (name == "decay") return Experiment::decay;
    if (name == "check") return Experiment::check;
    throw std::invalid_argument("experiment: unknown name '" + name + "'");
}

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::simulate: return "simulate";
        case Experiment::meanfield: return "meanfield";
        case Experiment::lln: return "lln";
        case Experiment::rate_I: return "rate_I";
        case Experiment::rate_J: return "rate_J";
        case Experiment::importance: return "importance";
        case Experiment::decay: return "decay";
        case Experiment::check: return "check";
    }
    return "?";
}

namespace {

[[noreturn]] void fail_at(const std::string& path, const std::string& why) {
    throw std::invalid_argument("config error at " + path + ": " + why);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) fail_at(path + "." + key, "missing");
    return j.at(key);
}

double need_num(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail_at(path + "." + key, "expected a number");
    return v.get<double>();
}

TestFunctional parse_functional(const json& j, const std::string& path, int dim, double horizon) {
    TestFunctional f;
    const std::string kind = need(j, "kind", path).get<std::string>();
    if (kind == "constant_one") return TestFunctional::constant_one();
    if (kind != "tanh_linear" && kind != "tanh_window")
        fail_at(path + ".kind", "unknown functional '" + kind + "'");
    f.kind = kind == "tanh_linear" ? TestFunctional::Kind::tanh_linear
                                   : TestFunctional::Kind::tanh_window;
    f.a = j.value("a", 1.0);
    f.b = j.value("b", 0.0);
    f.v = need(j, "v", path).get<std::vector<double>>();
    if (static_cast<int>(f.v.size()) != dim)
        fail_at(path + ".v", "direction must have length d = d'+1");
    if (f.kind == TestFunctional::Kind::tanh_linear) {
        f.t0 = need_num(j, "t", path);
        if (f.t0 < 0.0 || f.t0 > horizon + 1e-12) fail_at(path + ".t", "outside [0, T]");
    } else {
        f.t0 = need_num(j, "t0", path);
        f.t1 = need_num(j, "t1", path);
        if (!(f.t0 <= f.t1) || f.t0 < 0.0 || f.t1 > horizon + 1e-12)
            fail_at(path + ".t0", "window must satisfy 0 <= t0 <= t1 <= T");
    }
    return f;
}

EventSpec parse_event(const json& j, const std::string& path, int dim, double horizon) {
    EventSpec ev;
    ev.functional = parse_functional(need(j, "functional", path), path + ".functional", dim, horizon);
    ev.threshold = need_num(j, "threshold", path);
    const std::string dir = j.value("direction", std::string("geq"));
    if (dir == "geq") ev.direction = EventSpec::Direction::geq;
    else if (dir == "leq") ev.direction = EventSpec::Direction::leq;
    else fail_at(path + ".direction", "expected 'geq' or 'leq'");
    return ev;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not well-formed JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.canonical_json = j.dump();   // keys sorted by nlohmann's object ordering

    // model
    const json& model = need(j, "model", "$");
    cfg.activation = make_activation(need(model, "activation", "model").get<std::string>());

    const json& data = need(model, "data", "model");
    cfg.data.dim_in = static_cast<int>(need_num(data, "dim_in", "model.data"));
    const json& datoms = need(data, "atoms", "model.data");
    if (!datoms.is_array() || datoms.empty()) fail_at("model.data.atoms", "expected a nonempty array");
    for (std::size_t i = 0; i < datoms.size(); ++i) {
        const std::string p = "model.data.atoms[" + std::to_string(i) + "]";
        const auto z = need(datoms[i], "z", p).get<std::vector<double>>();
        if (static_cast<int>(z.size()) != cfg.data.dim_in) fail_at(p + ".z", "length != dim_in");
        cfg.data.z.insert(cfg.data.z.end(), z.begin(), z.end());
        cfg.data.y.push_back(need_num(datoms[i], "y", p));
        cfg.data.probs.push_back(need_num(datoms[i], "prob", p));
    }
    try {
        cfg.data.finalize();
    } catch (const std::exception& e) {
        fail_at("model.data.atoms", e.what());
    }

    const json& weights = need(model, "weights", "model");
    cfg.weights.dim = cfg.data.dim_in + 1;
    const json& watoms = need(weights, "atoms", "model.weights");
    if (!watoms.is_array() || watoms.empty())
        fail_at("model.weights.atoms", "expected a nonempty array");
    for (std::size_t i = 0; i < watoms.size(); ++i) {
        const std::string p = "model.weights.atoms[" + std::to_string(i) + "]";
        cfg.weights.points.push_back(need_num(watoms[i], "c", p));
        const auto w = need(watoms[i], "w", p).get<std::vector<double>>();
        if (static_cast<int>(w.size()) != cfg.data.dim_in) fail_at(p + ".w", "length != dim_in");
        cfg.weights.points.insert(cfg.weights.points.end(), w.begin(), w.end());
        cfg.weights.probs.push_back(need_num(watoms[i], "prob", p));
    }
    try {
        cfg.weights.finalize();
    } catch (const std::exception& e) {
        fail_at("model.weights.atoms", e.what());
    }

    // sim
    const json& sim = need(j, "sim", "$");
    cfg.sim.n = static_cast<int>(need_num(sim, "n", "sim"));
    cfg.sim.horizon = need_num(sim, "T", "sim");
    cfg.sim.dim_in = cfg.data.dim_in;
    if (cfg.sim.n < 1) fail_at("sim.n", "must be >= 1");
    if (!(cfg.sim.horizon > 0.0)) fail_at("sim.T", "must be > 0");

    // meanfield
    if (j.contains("meanfield")) {
        const json& mf = j.at("meanfield");
        cfg.meanfield.dt = mf.value("dt", cfg.meanfield.dt);
        cfg.meanfield.tol = mf.value("tol", cfg.meanfield.tol);
        cfg.meanfield.max_iter = mf.value("max_iter", cfg.meanfield.max_iter);
        cfg.meanfield.damping = mf.value("damping", 0.0);
    }
    if (!(cfg.meanfield.dt > 0.0) || cfg.meanfield.dt > 0.125)
        fail_at("meanfield.dt", "must lie in (0, 1/8]");
    if (cfg.meanfield.damping < 0.0 || cfg.meanfield.damping >= 1.0)
        fail_at("meanfield.damping", "must lie in [0, 1)");

    if (j.contains("tilt")) cfg.tilt.blocks = j.at("tilt").value("blocks", cfg.tilt.blocks);
    if (cfg.tilt.blocks < 1) fail_at("tilt.blocks", "must be >= 1");

    cfg.experiment = experiment_from_name(need(j, "experiment", "$").get<std::string>());

    // experiment parameters
    const int d = cfg.weights.dim;
    if (j.contains("params")) {
        const json& pr = j.at("params");
        cfg.params.replicas = pr.value("replicas", 1L);
        if (pr.contains("n_list")) cfg.params.n_list = pr.at("n_list").get<std::vector<int>>();
        if (pr.contains("functional"))
            cfg.params.functional =
                parse_functional(pr.at("functional"), "params.functional", d, cfg.sim.horizon);
        if (pr.contains("event"))
            cfg.params.event = parse_event(pr.at("event"), "params.event", d, cfg.sim.horizon);
        cfg.params.target = pr.value("target", 0.0);
        cfg.params.method = pr.value("method", std::string("tilted"));
        if (cfg.params.method != "tilted" && cfg.params.method != "naive" &&
            cfg.params.method != "identity")
            fail_at("params.method", "expected 'tilted', 'naive' or 'identity'");
        if (pr.contains("optimizer")) {
            const json& op = pr.at("optimizer");
            cfg.params.optimizer.blocks = op.value("blocks", cfg.tilt.blocks);
            cfg.params.optimizer.outer_iters = op.value("outer_iters", 8);
            cfg.params.optimizer.inner_iters = op.value("inner_iters", 40);
            cfg.params.optimizer.penalty0 = op.value("penalty0", 8.0);
            cfg.params.optimizer.fd_step = op.value("fd_step", 1e-4);
            cfg.params.optimizer.feasibility_tol = op.value("feasibility_tol", 5e-3);
        } else {
            cfg.params.optimizer.blocks = cfg.tilt.blocks;
        }
    } else {
        cfg.params.optimizer.blocks = cfg.tilt.blocks;
    }
    cfg.params.optimizer.horizon = cfg.sim.horizon;
    cfg.params.optimizer.dt = cfg.meanfield.dt;
    cfg.params.optimizer.picard_tol = std::min(cfg.meanfield.tol, 1e-9);
    cfg.params.optimizer.picard_max_iter = cfg.meanfield.max_iter;

    cfg.output_dir = j.value("output_dir", std::string("out"));
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
    } else {
        cfg.seed = 0;          // documented default; caller prints the warning
        cfg.seed_defaulted = true;
    }
    cfg.sim.seed = cfg.seed;
    cfg.plots = j.value("plots", false);
    cfg.workers = j.value("workers", 1);
    if (cfg.workers < 1) fail_at("workers", "must be >= 1");
    cfg.checked = j.value("checked", false);
    if (cfg.checked) cfg.workers = 1;   // checked mode is single-threaded by contract
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    return parse_config(read_text_file(path));
}

DerivedConstants derive_constants(const RunConfig& cfg) {
    DerivedConstants c;
    const double T = cfg.sim.horizon;
    const double cs = cfg.activation.c_sigma;
    c.c_sigma = cs;
    c.l_sigma = cfg.activation.l_sigma;
    c.c_nu = cfg.weights.c_nu;
    c.c_pi = cfg.data.c_pi;
    c.c_bar = 2.0 * (1.0 + T) * cs * cs * cs * std::exp(cs * cs * T);
    c.c_sgd = assemble_c_sgd(cs, cfg.weights.c_nu, T);
    c.c_traj = trajectory_bound(cfg.weights, cfg.data, cfg.activation, T);
    c.c_contr = contraction_constant(cfg.weights, cfg.data, cfg.activation, T);
    c.t0_window = std::min(T, 1.0 / (2.0 * c.c_contr));
    return c;
}

}  // namespace mfldp

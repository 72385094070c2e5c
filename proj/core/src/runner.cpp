#include "mfldp/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "mfldp/checks.hpp"
#include "mfldp/meanfield.hpp"
#include "mfldp/output.hpp"
#include "mfldp/sgd.hpp"

namespace mfldp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json constants_json(const DerivedConstants& c) {
    return json{{"c_sigma", c.c_sigma},   {"l_sigma", c.l_sigma}, {"c_nu", c.c_nu},
                {"c_pi", c.c_pi},         {"c_bar", c.c_bar},     {"c_sgd", c.c_sgd},
                {"c_traj", c.c_traj},     {"c_contr", c.c_contr}, {"t0_window", c.t0_window}};
}

json growth_json(const GrowthBoundReport& rep) {
    return json{{"y_star_1", rep.y_star_1},
                {"y_star_2", rep.y_star_2},
                {"y_star_4", rep.y_star_4},
                {"z_star_1", rep.z_star_1},
                {"z_star_2", rep.z_star_2},
                {"c_bar", rep.c_bar},
                {"c_sgd", rep.c_sgd},
                {"c_nu", rep.c_nu},
                {"bound", rep.bound},
                {"observed_sup", rep.observed_sup},
                {"holds", rep.holds()}};
}

struct RunContext {
    const RunConfig& cfg;
    fs::path out;
    json statuses = json::array();
    std::vector<std::string> files;

    void note(const std::string& task, const std::string& status) {
        statuses.push_back(json{{"task", task}, {"status", status}});
    }
    std::string file(const std::string& name) {
        files.push_back((out / name).string());
        return files.back();
    }
};

TestFunctional default_functional(const RunConfig& cfg) {
    if (cfg.params.functional) return *cfg.params.functional;
    return TestFunctional::tanh_of_c_at(cfg.sim.horizon, cfg.weights.dim);
}

PicardOptions picard_options(const RunConfig& cfg) {
    PicardOptions opts;
    opts.tol = cfg.meanfield.tol;
    opts.max_iter = cfg.meanfield.max_iter;
    opts.damping = cfg.meanfield.damping;
    return opts;
}

void write_rate_files(RunContext& ctx, const RateEstimate& est, const char* label) {
    CsvWriter csv({"estimate", "value", "entropy_cost", "init_cost", "constraint_gap", "feasible"});
    csv.add_row({label, CsvWriter::fmt(est.value), CsvWriter::fmt(est.entropy_cost),
                 CsvWriter::fmt(est.init_cost), CsvWriter::fmt(est.constraint_gap),
                 est.feasible ? "1" : "0"});
    csv.write_file(ctx.file("rate.csv"));

    CsvWriter trace({"step", "outer", "objective", "gap"});
    for (std::size_t i = 0; i < est.trace.size(); ++i)
        trace.add_row({CsvWriter::fmt(static_cast<long>(i)), CsvWriter::fmt(est.trace[i].outer),
                       CsvWriter::fmt(est.trace[i].objective), CsvWriter::fmt(est.trace[i].gap)});
    trace.write_file(ctx.file("trace.csv"));

    write_text_file(ctx.file("tilt.json"), est.tilt.to_json());
    if (!est.nu0_weights.empty()) {
        CsvWriter nu0({"atom", "weight"});
        for (std::size_t i = 0; i < est.nu0_weights.size(); ++i)
            nu0.add_row({CsvWriter::fmt(static_cast<long>(i)), CsvWriter::fmt(est.nu0_weights[i])});
        nu0.write_file(ctx.file("nu0.csv"));
    }
}

int dispatch(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    switch (cfg.experiment) {
        case Experiment::simulate: {
            const auto traj = simulate_theta_n(cfg.sim, cfg.data, cfg.weights, cfg.activation,
                                               cfg.seed);
            const auto stream = draw_data_stream(cfg.sim, cfg.data, cfg.seed);
            const auto rep = growth_bound_report(traj, stream, cfg.sim, cfg.data, cfg.activation);
            write_trajectory_csv(ctx.file("trajectories.csv"), traj, 0);
            write_text_file(ctx.file("growth.json"), growth_json(rep).dump(2));
            if (!rep.holds()) {
                ctx.note("growth_bound", "violated");
                return 3;
            }
            ctx.note("simulate", "ok");
            return 0;
        }
        case Experiment::meanfield: {
            auto [sol, rep] = lln_reference(cfg.weights, cfg.data, cfg.sim.horizon,
                                            cfg.meanfield.dt, cfg.activation,
                                            picard_options(cfg));
            json pj{{"iterations", rep.iterations},
                    {"converged", rep.converged},
                    {"used_fallback", rep.used_fallback},
                    {"c_contr", rep.c_contr},
                    {"gaps", rep.gaps},
                    {"contraction_ratios", rep.contraction_ratios}};
            write_text_file(ctx.file("picard.json"), pj.dump(2));
            if (!rep.converged) {
                ctx.note("picard", "failed");
                return 2;
            }
            write_trajectory_csv(ctx.file("meanfield.csv"), sol.to_trajectory_measure(), 0);
            ctx.note("picard", rep.used_fallback ? "converged_after_fallback" : "converged");
            return 0;
        }
        case Experiment::lln: {
            const TestFunctional f = default_functional(cfg);
            const auto rows = lln_experiment(f, cfg.params.n_list, cfg.params.replicas, cfg.sim,
                                             cfg.weights, cfg.data, cfg.activation,
                                             cfg.meanfield.dt, cfg.seed, cfg.workers);
            CsvWriter csv({"n", "median_abs_error", "iqr"});
            PlotSeries med{"median", {}, {}};
            for (const auto& r : rows) {
                csv.add_row({CsvWriter::fmt(r.n), CsvWriter::fmt(r.median_abs_error),
                             CsvWriter::fmt(r.iqr)});
                med.x.push_back(static_cast<double>(r.n));
                med.y.push_back(r.median_abs_error);
            }
            csv.write_file(ctx.file("lln.csv"));
            if (cfg.plots)
                write_svg_lineplot(ctx.file("lln.svg"), "median |theta^n(f) - theta*(f)|", {med});
            ctx.note("lln", "ok");
            return 0;
        }
        case Experiment::rate_I:
        case Experiment::rate_J: {
            const TestFunctional f = default_functional(cfg);
            const bool annealed = cfg.experiment == Experiment::rate_J;
            const RateEstimate est =
                annealed ? estimate_J(cfg.params.target, f, cfg.weights, cfg.data, cfg.activation,
                                      cfg.params.optimizer)
                         : estimate_I(cfg.params.target, f, cfg.weights, cfg.data, cfg.activation,
                                      cfg.params.optimizer);
            write_rate_files(ctx, est, annealed ? "J_upper" : "I_upper");
            ctx.note("optimizer", est.feasible ? "feasible" : "infeasible");
            return est.feasible ? 0 : 4;
        }
        case Experiment::importance: {
            if (!cfg.params.event)
                throw std::invalid_argument("config error at params.event: missing");
            const EventSpec& event = *cfg.params.event;
            const auto mc = naive_mc(event, cfg.sim, cfg.weights, cfg.data, cfg.activation,
                                     cfg.params.replicas, cfg.seed, cfg.workers);
            StepKernelSequence seq;
            std::string tilt_label;
            if (cfg.params.method == "identity") {
                seq = StepKernelSequence::constant(cfg.data, cfg.sim);
                tilt_label = "identity";
            } else {
                // variance-oriented pilot tilt; the rate-optimal kernels tend
                // to over-tilt the likelihood ratios at sampling time
                seq = cross_entropy_tilt(event, cfg.sim, cfg.weights, cfg.data, cfg.activation,
                                         std::max(cfg.params.replicas / 4, 200L), cfg.seed, 0.25,
                                         cfg.workers);
                tilt_label = "optimized";
            }
            const auto is = importance_sample(event, seq, cfg.sim, cfg.weights, cfg.data,
                                              cfg.activation, cfg.params.replicas, cfg.seed,
                                              cfg.workers);
            CsvWriter csv({"method", "p_hat", "ci_halfwidth", "sample_sd", "ess", "replicas"});
            csv.add_row({"naive", CsvWriter::fmt(mc.p_hat), CsvWriter::fmt(mc.ci_halfwidth),
                         CsvWriter::fmt(mc.sample_sd), CsvWriter::fmt(double(mc.replicas)),
                         CsvWriter::fmt(mc.replicas)});
            csv.add_row({tilt_label, CsvWriter::fmt(is.p_hat), CsvWriter::fmt(is.ci_halfwidth),
                         CsvWriter::fmt(is.sample_sd), CsvWriter::fmt(is.ess),
                         CsvWriter::fmt(is.replicas)});
            csv.write_file(ctx.file("importance.csv"));
            if (is.degenerate) {
                ctx.note("importance", "zero_ess");
                return 5;
            }
            ctx.note("importance", "ok");
            return 0;
        }
        case Experiment::decay: {
            if (!cfg.params.event)
                throw std::invalid_argument("config error at params.event: missing");
            const EventSpec& event = *cfg.params.event;
            const DecayMethod method =
                cfg.params.method == "naive" ? DecayMethod::naive : DecayMethod::tilted;
            TiltedKernel rho = TiltedKernel::constant(cfg.data, cfg.sim.horizon);
            if (method == DecayMethod::tilted) {
                const RateEstimate est = estimate_J(event.threshold, event.functional, cfg.weights,
                                                    cfg.data, cfg.activation, cfg.params.optimizer);
                rho = est.tilt;
                write_text_file(ctx.file("tilt.json"), est.tilt.to_json());
                CsvWriter rcsv({"J_upper", "entropy_cost", "init_cost", "gap", "feasible"});
                rcsv.add_row({CsvWriter::fmt(est.value), CsvWriter::fmt(est.entropy_cost),
                              CsvWriter::fmt(est.init_cost), CsvWriter::fmt(est.constraint_gap),
                              est.feasible ? "1" : "0"});
                rcsv.write_file(ctx.file("rate.csv"));
            }
            const auto rows = decay_curve(event, cfg.params.n_list, method, rho, cfg.sim,
                                          cfg.weights, cfg.data, cfg.activation,
                                          cfg.params.replicas, cfg.seed, cfg.workers);
            CsvWriter csv({"n", "n_prime", "p_hat", "ci_halfwidth", "minus_log_p_over_nprime",
                           "flagged"});
            PlotSeries rate{"-(1/n') log p", {}, {}};
            for (const auto& r : rows) {
                csv.add_row({CsvWriter::fmt(r.n), CsvWriter::fmt(r.n_prime),
                             CsvWriter::fmt(r.p_hat), CsvWriter::fmt(r.ci_halfwidth),
                             r.flagged ? "" : CsvWriter::fmt(r.rate), r.flagged ? "1" : "0"});
                if (!r.flagged) {
                    rate.x.push_back(static_cast<double>(r.n));
                    rate.y.push_back(r.rate);
                }
            }
            csv.write_file(ctx.file("decay.csv"));
            if (cfg.plots && !rate.x.empty())
                write_svg_lineplot(ctx.file("decay.svg"), "empirical decay rate", {rate});
            ctx.note("decay", "ok");
            return 0;
        }
        case Experiment::check: {
            std::vector<CheckResult> results;
            results.push_back(check_gradient_oracle(cfg.activation, 100, cfg.seed));
            results.push_back(
                check_entropy_inequality_random(cfg.data, 100, {2, 3, 7}, cfg.seed));
            results.push_back(check_representation_identity(cfg.sim, cfg.data, cfg.weights,
                                                            cfg.activation, cfg.seed));
            results.push_back(
                check_contraction(cfg.weights, cfg.data, cfg.activation, cfg.sim.horizon));
            results.push_back(check_euler_order(cfg.weights, cfg.data, cfg.activation,
                                                cfg.sim.horizon, cfg.meanfield.dt));
            results.push_back(check_growth_bound(cfg.sim, cfg.data, cfg.weights, cfg.activation,
                                                 cfg.seed));
            CsvWriter csv({"check", "pass", "detail"});
            bool all = true;
            for (const auto& r : results) {
                csv.add_row({r.name, r.pass ? "1" : "0", r.detail});
                ctx.note(r.name, r.pass ? "pass" : "fail");
                all = all && r.pass;
            }
            csv.write_file(ctx.file("checks.csv"));
            return all ? 0 : 6;
        }
    }
    return 1;
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
    RunOutcome outcome;
    RunContext ctx{cfg, fs::path(cfg.output_dir)};
    fs::create_directories(ctx.out);

    std::string failure;
    try {
        outcome.exit_code = dispatch(ctx);
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        failure = e.what();
        ctx.note("dispatch", std::string("error: ") + e.what());
    }

    const DerivedConstants constants = derive_constants(cfg);
    json manifest;
    manifest["tool"] = "mfldp";
    manifest["version"] = kToolVersion;
    manifest["experiment"] = experiment_name(cfg.experiment);
    manifest["config_sha256"] = sha256_hex(cfg.canonical_json);
    manifest["seed"] = cfg.seed;
    manifest["seed_defaulted"] = cfg.seed_defaulted;
    manifest["rng"] = RngStream::name();
    manifest["workers"] = cfg.workers;
    manifest["checked"] = cfg.checked;
    manifest["constants"] = constants_json(constants);
    manifest["statuses"] = ctx.statuses;
    manifest["files"] = ctx.files;
    manifest["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    write_text_file((ctx.out / "manifest.json").string(), manifest.dump(2) + "\n");

    outcome.files_written = ctx.files;
    if (outcome.exit_code != 0) {
        outcome.status = failure.empty() ? "task_failed(exit=" + std::to_string(outcome.exit_code) + ")"
                                         : failure;
    }
    return outcome;
}

}  // namespace mfldp

#include "mfldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "mfldp/model.hpp"

namespace mfldp {

namespace {

constexpr std::uint64_t kReplicaRoot = 0xC0FFEEull;

std::uint64_t replica_seed(std::uint64_t master, long replica) {
    return RngStream(master).derive(kReplicaRoot).derive(static_cast<std::uint64_t>(replica)).next_u64();
}

void parallel_for(long count, int workers, const std::function<void(long)>& body) {
    if (workers <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    const int used = static_cast<int>(std::min<long>(workers, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used));
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&, w]() {
            for (long i = w; i < count; i += used) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct SampleStats {
    double mean = 0.0;
    double sd = 0.0;   // sample standard deviation, n-1 denominator
};

SampleStats stats_of(const std::vector<double>& xs) {
    SampleStats s;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(acc / (n - 1.0));
    }
    return s;
}

}  // namespace

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = h - std::floor(h);
    return (1.0 - frac) * xs[lo] + frac * xs[hi];
}

ISResult importance_sample(const EventSpec& event, const StepKernelSequence& seq,
                           const SimConfig& cfg, const InitialWeightAtomSet& nu,
                           const DataAtomSet& pi, const Activation& act, long replicas,
                           std::uint64_t seed, int workers) {
    if (replicas < 1) throw std::invalid_argument("importance_sample: replicas must be >= 1");
    const long steps = cfg.n_prime();
    if (static_cast<long>(seq.steps()) != steps)
        throw std::invalid_argument("importance_sample: kernel sequence length != floor(nT)");

    // per-step inverse CDFs, shared across replicas
    std::vector<std::vector<double>> cdfs(static_cast<std::size_t>(steps));
    for (long k = 0; k < steps; ++k)
        cdfs[static_cast<std::size_t>(k)] = cumulative_probs(seq.kernel(static_cast<std::size_t>(k)));

    std::vector<double> samples(static_cast<std::size_t>(replicas), 0.0);
    std::vector<double> weights(static_cast<std::size_t>(replicas), 0.0);

    parallel_for(replicas, workers, [&](long r) {
        const std::uint64_t rs = replica_seed(seed, r);
        const ParamMeasure init = draw_initial_particles(cfg, nu, rs);
        DataStream stream;
        stream.source = DataStream::Source::step_kernels;
        stream.seed = rs;
        stream.points.resize(static_cast<std::size_t>(steps));
        RngStream rng = RngStream(rs).derive(kDataSubStream);
        double log_l = 0.0;
        bool dead = false;
        for (long k = 0; k < steps; ++k) {
            const std::size_t a = rng.categorical_cdf(cdfs[static_cast<std::size_t>(k)]);
            stream.points[static_cast<std::size_t>(k)] = a;
            const double q = seq.kernel(static_cast<std::size_t>(k))[a];
            if (q <= 0.0) throw std::logic_error("importance_sample: sampler emitted a zero-mass atom");
            const double p = pi.probs[a];
            if (p == 0.0) { dead = true; continue; }   // impossible under pi: weight 0
            log_l += std::log(p) - std::log(q);
        }
        const double l = dead ? 0.0 : std::exp(log_l);
        const auto traj = pushforward_eta_n(init, stream, cfg, pi, act);
        const double value = empirical_expectation(traj, event.functional);
        weights[static_cast<std::size_t>(r)] = l;
        samples[static_cast<std::size_t>(r)] = event.contains(value) ? l : 0.0;
    });

    ISResult res;
    res.replicas = replicas;
    const SampleStats s = stats_of(samples);
    res.p_hat = s.mean;
    res.sample_sd = s.sd;
    res.ci_halfwidth = 1.96 * s.sd / std::sqrt(static_cast<double>(replicas));
    double wsum = 0.0, w2sum = 0.0;
    for (double w : weights) {
        wsum += w;
        w2sum += w * w;
    }
    res.ess = w2sum > 0.0 ? wsum * wsum / w2sum : 0.0;
    res.degenerate = w2sum == 0.0;
    return res;
}

MCResult naive_mc(const EventSpec& event, const SimConfig& cfg, const InitialWeightAtomSet& nu,
                  const DataAtomSet& pi, const Activation& act, long replicas,
                  std::uint64_t seed, int workers) {
    if (replicas < 1) throw std::invalid_argument("naive_mc: replicas must be >= 1");
    std::vector<double> samples(static_cast<std::size_t>(replicas), 0.0);
    parallel_for(replicas, workers, [&](long r) {
        const auto traj = simulate_theta_n(cfg, pi, nu, act, replica_seed(seed, r));
        const double value = empirical_expectation(traj, event.functional);
        samples[static_cast<std::size_t>(r)] = event.contains(value) ? 1.0 : 0.0;
    });
    MCResult res;
    res.replicas = replicas;
    const SampleStats s = stats_of(samples);
    res.p_hat = s.mean;
    res.sample_sd = s.sd;
    res.ci_halfwidth = 1.96 * s.sd / std::sqrt(static_cast<double>(replicas));
    return res;
}

StepKernelSequence cross_entropy_tilt(const EventSpec& event, const SimConfig& cfg,
                                      const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                                      const Activation& act, long pilot_replicas,
                                      std::uint64_t seed, double shrink, int workers) {
    if (!(shrink > 0.0 && shrink < 1.0))
        throw std::invalid_argument("cross_entropy_tilt: shrink must lie in (0, 1)");
    const std::uint64_t pilot_seed = RngStream(seed).derive(0xCE11ull).next_u64();
    std::vector<std::vector<double>> counts(static_cast<std::size_t>(pilot_replicas));
    parallel_for(pilot_replicas, workers, [&](long r) {
        const std::uint64_t rs = replica_seed(pilot_seed, r);
        const auto traj = simulate_theta_n(cfg, pi, nu, act, rs);
        if (!event.contains(empirical_expectation(traj, event.functional))) return;
        const DataStream stream = draw_data_stream(cfg, pi, rs);
        std::vector<double> c(pi.size(), 0.0);
        for (std::size_t a : stream.points) c[a] += 1.0;
        counts[static_cast<std::size_t>(r)] = std::move(c);
    });
    std::vector<double> freq(pi.size(), 0.0);
    double total = 0.0;
    for (const auto& c : counts) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            freq[j] += c[j];
            total += c[j];
        }
    }
    std::vector<double> row(pi.probs);
    if (total > 0.0) {
        for (std::size_t j = 0; j < pi.size(); ++j)
            row[j] = (1.0 - shrink) * freq[j] / total + shrink * pi.probs[j];
        // renormalize away accumulated rounding
        double s = 0.0;
        for (double p : row) s += p;
        for (double& p : row) p /= s;
    }
    StepKernelSequence seq;
    seq.n = cfg.n;
    seq.atom_count = pi.size();
    const std::size_t steps = static_cast<std::size_t>(cfg.n_prime());
    seq.probs.resize(steps * pi.size());
    for (std::size_t k = 0; k < steps; ++k)
        std::copy(row.begin(), row.end(), seq.probs.begin() + k * pi.size());
    return seq;
}

namespace {

std::vector<double> softmax_reweight(std::span<const double> base, std::span<const double> logits) {
    std::vector<double> out(base.size(), 0.0);
    double top = -kInfiniteEntropy;
    for (std::size_t j = 0; j < base.size(); ++j)
        if (base[j] > 0.0) top = std::max(top, std::log(base[j]) + logits[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
        if (base[j] > 0.0) {
            out[j] = std::exp(std::log(base[j]) + logits[j] - top);
            z += out[j];
        }
    }
    for (double& p : out) p /= z;
    return out;
}

// Shared machinery for the two rate estimators: quadratic-penalty outer
// loop, finite-difference descent with backtracking inner loop.
struct VariationalProblem {
    const TestFunctional& f;
    const InitialWeightAtomSet& nu;
    const DataAtomSet& pi;
    const Activation& act;
    const OptimizerConfig& opt;
    double target = 0.0;
    bool optimize_nu0 = false;

    std::size_t tilt_params() const { return opt.blocks * pi.size(); }
    std::size_t params() const { return tilt_params() + (optimize_nu0 ? nu.size() : 0); }

    TiltedKernel kernel_of(std::span<const double> x) const {
        TiltedKernel k = TiltedKernel::constant_blocks(pi, opt.horizon, opt.blocks);
        for (std::size_t b = 0; b < opt.blocks; ++b) {
            const auto row = exponential_tilt(
                pi, {x.data() + b * pi.size(), pi.size()}, 1.0);
            std::copy(row.begin(), row.end(), k.row_mut(b).begin());
        }
        return k;
    }

    std::vector<double> nu0_of(std::span<const double> x) const {
        if (!optimize_nu0) return nu.probs;
        return softmax_reweight(nu.probs, x.subspan(tilt_params()));
    }

    struct Eval {
        double entropy = 0.0;    // (1/T) R(rho)
        double init_cost = 0.0;  // H(nu0 | nu)
        double gap = 0.0;        // |theta(f) - target|
        bool solver_ok = false;
        double penalized(double mu) const {
            return entropy + init_cost + mu * gap * gap;
        }
    };

    Eval evaluate(std::span<const double> x) const {
        Eval e;
        const TiltedKernel rho = kernel_of(x);
        e.entropy = relative_entropy_R(rho, pi) / opt.horizon;
        InitialWeightAtomSet nu0 = nu;
        if (optimize_nu0) {
            nu0.probs = nu0_of(x);
            e.init_cost = kl_divergence(nu0.probs, nu.probs);
        }
        PicardOptions popts;
        popts.tol = opt.picard_tol;
        popts.max_iter = opt.picard_max_iter;
        auto [sol, rep] = picard_solve(rho, pi, nu0, opt.dt, act, popts);
        e.solver_ok = rep.converged;
        if (!e.solver_ok) return e;
        const double value = empirical_expectation(sol.to_trajectory_measure(), f);
        e.gap = std::abs(value - target);
        return e;
    }
};

RateEstimate run_penalty_descent(const VariationalProblem& prob) {
    const OptimizerConfig& opt = prob.opt;
    std::vector<double> x(prob.params(), 0.0);
    VariationalProblem::Eval cur = prob.evaluate(x);
    if (!cur.solver_ok)
        throw std::runtime_error("rate estimate: mean-field solver failed at the base point");

    RateEstimate best;
    best.feasible = false;
    best.constraint_gap = cur.gap;
    double best_feasible_value = kInfiniteEntropy;
    double best_gap = cur.gap;
    std::vector<double> best_x = x;

    auto consider = [&](const std::vector<double>& cand, const VariationalProblem::Eval& e) {
        const double total = e.entropy + e.init_cost;
        if (e.gap <= opt.feasibility_tol && total < best_feasible_value) {
            best_feasible_value = total;
            best.feasible = true;
            best_x = cand;
        } else if (!best.feasible && e.gap < best_gap) {
            best_gap = e.gap;
            best_x = cand;
        }
    };
    consider(x, cur);

    double mu = opt.penalty0;
    std::vector<double> grad(prob.params()), cand(prob.params());
    for (int outer = 0; outer < opt.outer_iters; ++outer) {
        double f_cur = cur.penalized(mu);
        double step = opt.step0;
        for (int inner = 0; inner < opt.inner_iters; ++inner) {
            // central differences in logit space
            double gnorm2 = 0.0;
            for (std::size_t p = 0; p < prob.params(); ++p) {
                const double keep = x[p];
                x[p] = keep + opt.fd_step;
                const double up = prob.evaluate(x).penalized(mu);
                x[p] = keep - opt.fd_step;
                const double dn = prob.evaluate(x).penalized(mu);
                x[p] = keep;
                grad[p] = (up - dn) / (2.0 * opt.fd_step);
                gnorm2 += grad[p] * grad[p];
            }
            if (gnorm2 < 1e-18) break;
            bool accepted = false;
            while (step > 1e-12) {
                for (std::size_t p = 0; p < prob.params(); ++p) cand[p] = x[p] - step * grad[p];
                const VariationalProblem::Eval e = prob.evaluate(cand);
                if (e.solver_ok && e.penalized(mu) <= f_cur - 1e-4 * step * gnorm2) {
                    x = cand;
                    cur = e;
                    f_cur = e.penalized(mu);
                    consider(x, cur);
                    best.trace.push_back({outer, f_cur, cur.gap});
                    accepted = true;
                    step = std::min(step * 2.0, 4.0 * opt.step0);
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        mu *= 2.0;
    }

    const VariationalProblem::Eval fin = prob.evaluate(best_x);
    best.entropy_cost = fin.entropy;
    best.init_cost = fin.init_cost;
    best.value = fin.entropy + fin.init_cost;
    best.constraint_gap = fin.gap;
    best.tilt = prob.kernel_of(best_x);
    best.nu0_weights = prob.nu0_of(best_x);
    return best;
}

}  // namespace

RateEstimate estimate_I(double target, const TestFunctional& f, const InitialWeightAtomSet& nu,
                        const DataAtomSet& pi, const Activation& act,
                        const OptimizerConfig& opt) {
    VariationalProblem prob{f, nu, pi, act, opt, target, false};
    return run_penalty_descent(prob);
}

RateEstimate estimate_J(double target, const TestFunctional& f, const InitialWeightAtomSet& nu,
                        const DataAtomSet& pi, const Activation& act,
                        const OptimizerConfig& opt) {
    VariationalProblem prob{f, nu, pi, act, opt, target, true};
    RateEstimate joint = run_penalty_descent(prob);
    // The quenched solution with nu0 = nu is admissible for the annealed
    // infimum, so it is kept as a candidate; the estimate can then never
    // exceed estimate_I on the same target and budget.
    RateEstimate quenched = estimate_I(target, f, nu, pi, act, opt);
    const bool quenched_wins =
        (quenched.feasible && !joint.feasible) ||
        (quenched.feasible == joint.feasible && quenched.value < joint.value);
    if (quenched_wins) {
        quenched.nu0_weights = nu.probs;
        return quenched;
    }
    return joint;
}

std::vector<DecayRow> decay_curve(const EventSpec& event, const std::vector<int>& n_list,
                                  DecayMethod method, const TiltedKernel& rho,
                                  const SimConfig& base_cfg, const InitialWeightAtomSet& nu,
                                  const DataAtomSet& pi, const Activation& act, long replicas,
                                  std::uint64_t seed, int workers) {
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        if (n_list[i] >= n_list[i + 1])
            throw std::invalid_argument("decay_curve: n_list must be increasing");
    std::vector<DecayRow> rows;
    for (int n : n_list) {
        SimConfig cfg = base_cfg;
        cfg.n = n;
        const std::uint64_t row_seed =
            RngStream(seed).derive(0xDECA).derive(static_cast<std::uint64_t>(n)).next_u64();
        DecayRow row;
        row.n = n;
        row.n_prime = cfg.n_prime();
        if (method == DecayMethod::naive) {
            const MCResult mc = naive_mc(event, cfg, nu, pi, act, replicas, row_seed, workers);
            row.p_hat = mc.p_hat;
            row.ci_halfwidth = mc.ci_halfwidth;
        } else {
            const StepKernelSequence seq = discretize_kernel(rho, n);
            const ISResult is =
                importance_sample(event, seq, cfg, nu, pi, act, replicas, row_seed, workers);
            row.p_hat = is.p_hat;
            row.ci_halfwidth = is.ci_halfwidth;
        }
        if (row.p_hat > 0.0) {
            row.rate = -std::log(row.p_hat) / static_cast<double>(row.n_prime);
        } else {
            row.flagged = true;    // no rate logged for an unobserved event
        }
        rows.push_back(row);
    }
    return rows;
}

std::uint64_t lln_replica_seed(std::uint64_t seed, int n, long replica) {
    const std::uint64_t n_seed =
        RngStream(seed).derive(0x11A).derive(static_cast<std::uint64_t>(n)).next_u64();
    return replica_seed(n_seed, replica);
}

std::vector<LlnRow> lln_experiment(const TestFunctional& f, const std::vector<int>& n_list,
                                   long replicas, const SimConfig& base_cfg,
                                   const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                                   const Activation& act, double dt, std::uint64_t seed,
                                   int workers) {
    PicardOptions popts;
    popts.tol = 1e-10;
    auto [ref, rep] = lln_reference(nu, pi, base_cfg.horizon, dt, act, popts);
    if (!rep.converged) throw std::runtime_error("lln_experiment: reference solve did not converge");
    const double star = empirical_expectation(ref.to_trajectory_measure(), f);

    std::vector<LlnRow> rows;
    for (int n : n_list) {
        SimConfig cfg = base_cfg;
        cfg.n = n;
        std::vector<double> errs(static_cast<std::size_t>(replicas), 0.0);
        parallel_for(replicas, workers, [&](long r) {
            const auto traj = simulate_theta_n(cfg, pi, nu, act, lln_replica_seed(seed, n, r));
            errs[static_cast<std::size_t>(r)] =
                std::abs(empirical_expectation(traj, f) - star);
        });
        LlnRow row;
        row.n = n;
        row.median_abs_error = quantile(errs, 0.5);
        row.iqr = quantile(errs, 0.75) - quantile(errs, 0.25);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mfldp

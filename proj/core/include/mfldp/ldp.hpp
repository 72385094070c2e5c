#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfldp/meanfield.hpp"
#include "mfldp/sgd.hpp"
#include "mfldp/tilt.hpp"

namespace mfldp {

// Half-space event {theta(f) >= a} or {theta(f) <= a} for a catalog functional.
struct EventSpec {
    TestFunctional functional;
    double threshold = 0.0;
    enum class Direction { geq, leq } direction = Direction::geq;

    bool contains(double value) const {
        return direction == Direction::geq ? value >= threshold : value <= threshold;
    }
};

// Output of the variational rate-function optimizers. The infima over all
// admissible measures are non-constructive; we optimize over the
// exponential-tilt block family, so every value is an upper bound for the
// true rate and is labeled as such in all outputs.
struct RateEstimate {
    double value = 0.0;          // entropy_cost + init_cost
    double entropy_cost = 0.0;   // (1/T) R(tilt)
    double init_cost = 0.0;      // H(nu0 | nu), 0 for the quenched rate
    double constraint_gap = 0.0; // |theta(f) - target|
    bool feasible = false;
    TiltedKernel tilt;
    std::vector<double> nu0_weights;   // reweighted initial distribution (annealed only)
    // (outer iteration, penalized objective, gap) per accepted descent step.
    struct TraceEntry {
        int outer = 0;
        double objective = 0.0;
        double gap = 0.0;
    };
    std::vector<TraceEntry> trace;
};

struct OptimizerConfig {
    std::size_t blocks = 2;          // tilt blocks over [0, T]
    int outer_iters = 8;             // penalty-doubling rounds
    int inner_iters = 40;            // descent steps per round
    double penalty0 = 8.0;
    double fd_step = 1e-4;           // central differences in logit space
    double feasibility_tol = 5e-3;
    double step0 = 0.5;              // initial line-search step
    double horizon = 1.0;
    double dt = 1.0 / 128.0;
    double picard_tol = 1e-9;
    int picard_max_iter = 200;
};

// Quenched rate upper bound: minimize (1/T) R(rho(lambda)) over block tilt
// logits subject to the mean-field solution hitting theta(f) = target,
// via a quadratic-penalty outer loop and finite-difference descent inner
// loop. target = theta*(f) yields value 0 with tilt = pi.
RateEstimate estimate_I(double target, const TestFunctional& f, const InitialWeightAtomSet& nu,
                        const DataAtomSet& pi, const Activation& act,
                        const OptimizerConfig& opt);

// Annealed rate upper bound: jointly optimizes initial-weight logits (exact
// H(nu0|nu) over nu's atoms) and the tilt. The quenched solution with
// nu0 = nu is always admissible here and is kept as a candidate, so the
// estimate can never exceed estimate_I on the same target and budget.
RateEstimate estimate_J(double target, const TestFunctional& f, const InitialWeightAtomSet& nu,
                        const DataAtomSet& pi, const Activation& act,
                        const OptimizerConfig& opt);

struct ISResult {
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;   // 1.96 * sample sd / sqrt(replicas)
    double ess = 0.0;            // (sum w)^2 / sum w^2
    double sample_sd = 0.0;      // sd of the per-replica weighted indicators
    long replicas = 0;
    bool degenerate = false;     // all weights vanished
};

struct MCResult {
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;
    double sample_sd = 0.0;
    long replicas = 0;
};

// Importance sampling with open-loop per-step kernels: each replica draws
// its data stream from the kernels, evolves freshly sampled initial
// particles, and weighs the event indicator by the likelihood ratio
// prod_k pi(X_k) / kernel_k(X_k). With kernels = pi this reproduces
// naive_mc exactly under coupled seeds.
ISResult importance_sample(const EventSpec& event, const StepKernelSequence& seq,
                           const SimConfig& cfg, const InitialWeightAtomSet& nu,
                           const DataAtomSet& pi, const Activation& act, long replicas,
                           std::uint64_t seed, int workers = 1);

MCResult naive_mc(const EventSpec& event, const SimConfig& cfg, const InitialWeightAtomSet& nu,
                  const DataAtomSet& pi, const Activation& act, long replicas,
                  std::uint64_t seed, int workers = 1);

// Variance-oriented sampling tilt (one cross-entropy round): pilot replicas
// run under pi, and the data-atom frequencies pooled over the streams of
// hitting replicas, shrunk toward pi, become a constant per-step kernel.
// The pilot consumes its own seed stream, so estimates driven by the result
// stay unbiased. Falls back to pi when the pilot never hits.
StepKernelSequence cross_entropy_tilt(const EventSpec& event, const SimConfig& cfg,
                                      const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                                      const Activation& act, long pilot_replicas,
                                      std::uint64_t seed, double shrink = 0.25,
                                      int workers = 1);

struct DecayRow {
    int n = 0;
    long n_prime = 0;
    double p_hat = 0.0;
    double ci_halfwidth = 0.0;
    double rate = 0.0;           // -(1/n') log p_hat
    bool flagged = false;        // p_hat = 0: no rate logged
};

enum class DecayMethod { naive, tilted };

// Decay of the event probability along n_list. The tilted method drives the
// sampler with the kernel discretized per n; rho is ignored for naive.
std::vector<DecayRow> decay_curve(const EventSpec& event, const std::vector<int>& n_list,
                                  DecayMethod method, const TiltedKernel& rho,
                                  const SimConfig& base_cfg, const InitialWeightAtomSet& nu,
                                  const DataAtomSet& pi, const Activation& act, long replicas,
                                  std::uint64_t seed, int workers = 1);

struct LlnRow {
    int n = 0;
    double median_abs_error = 0.0;
    double iqr = 0.0;
};

// Convergence of theta^n(f) to the mean-field value theta*(f): per n,
// `replicas` independent simulations, median and interquartile range of the
// absolute error.
std::vector<LlnRow> lln_experiment(const TestFunctional& f, const std::vector<int>& n_list,
                                   long replicas, const SimConfig& base_cfg,
                                   const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                                   const Activation& act, double dt, std::uint64_t seed,
                                   int workers = 1);

// Seed of one replica inside lln_experiment; exposed so audits (the growth
// bound in particular) can re-simulate exactly the runs the experiment saw.
std::uint64_t lln_replica_seed(std::uint64_t seed, int n, long replica);

// Interpolated quantile of a copy of xs (type-7, matching common practice).
double quantile(std::vector<double> xs, double q);

}  // namespace mfldp

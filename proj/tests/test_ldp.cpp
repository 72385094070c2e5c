#include <doctest.h>

#include <cmath>

#include "mfldp/ldp.hpp"

using namespace mfldp;

namespace {

DataAtomSet desk_data() {
    DataAtomSet pi;
    pi.dim_in = 2;
    pi.z = {0.9, -0.3, -0.6, 0.7, 0.2, 0.8, -0.4, -0.5};
    pi.y = {0.8, -0.5, 0.3, -0.9};
    pi.probs = {0.3, 0.3, 0.2, 0.2};
    pi.finalize();
    return pi;
}

InitialWeightAtomSet desk_weights() {
    InitialWeightAtomSet nu;
    nu.dim = 3;
    nu.points = {
        0.5,  0.3,  -0.2, -0.4, -0.6, 0.1,  0.7,  0.2,  0.5,  -0.2, 0.4,  -0.7,
        0.3,  -0.5, -0.3, -0.6, 0.1,  0.6,  0.2,  0.7,  0.0,  -0.1, -0.2, 0.4,
    };
    nu.probs.assign(8, 0.125);
    nu.finalize();
    return nu;
}

// Data-dominated configuration: the initial atoms sit in a tight cluster so
// trajectory fluctuations come almost entirely from the data stream.
InitialWeightAtomSet clustered_weights() {
    InitialWeightAtomSet nu;
    nu.dim = 3;
    nu.points = {
        0.32, 0.21, -0.11, 0.28, 0.19, -0.09, 0.31, 0.22, -0.12, 0.29, 0.18, -0.08,
        0.33, 0.20, -0.10, 0.27, 0.23, -0.13, 0.30, 0.17, -0.07, 0.30, 0.20, -0.10,
    };
    nu.probs.assign(8, 0.125);
    nu.finalize();
    return nu;
}

DataAtomSet spread_data() {
    DataAtomSet pi;
    pi.dim_in = 2;
    pi.z = {0.9, -0.3, -0.6, 0.7, 0.2, 0.8, -0.4, -0.5};
    pi.y = {1.2, -0.8, 0.5, -1.0};
    pi.probs = {0.3, 0.3, 0.2, 0.2};
    pi.finalize();
    return pi;
}

SimConfig desk_cfg(int n, double horizon) {
    SimConfig cfg;
    cfg.n = n;
    cfg.horizon = horizon;
    cfg.dim_in = 2;
    return cfg;
}

OptimizerConfig small_opt(double horizon) {
    OptimizerConfig opt;
    opt.horizon = horizon;
    opt.dt = 1.0 / 64.0;
    opt.blocks = 2;
    opt.outer_iters = 6;
    opt.inner_iters = 25;
    return opt;
}

}  // namespace

TEST_CASE("quantile basics") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({5.0}, 0.9) == 5.0);
}

TEST_CASE("naive mc on trivial events") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(16, 0.5);

    EventSpec whole;
    whole.functional = TestFunctional::constant_one();
    whole.threshold = 0.5;   // value is always 1
    whole.direction = EventSpec::Direction::geq;
    CHECK(naive_mc(whole, cfg, nu, pi, act, 64, 7).p_hat == 1.0);

    EventSpec empty = whole;
    empty.direction = EventSpec::Direction::leq;
    CHECK(naive_mc(empty, cfg, nu, pi, act, 64, 7).p_hat == 0.0);
}

TEST_CASE("event threshold at the empirical median has rate about one half") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(32, 0.5);
    const auto f = TestFunctional::tanh_of_c_at(0.5, 3);

    std::vector<double> vals;
    for (long r = 0; r < 400; ++r) {
        const auto traj = simulate_theta_n(cfg, pi, nu, act, lln_replica_seed(5, 32, r));
        vals.push_back(empirical_expectation(traj, f));
    }
    EventSpec ev;
    ev.functional = f;
    ev.threshold = quantile(vals, 0.5);
    ev.direction = EventSpec::Direction::geq;
    const auto mc = naive_mc(ev, cfg, nu, pi, act, 2000, 99);
    CHECK(std::abs(mc.p_hat - 0.5) < 3.0 * mc.ci_halfwidth + 0.02);
}

TEST_CASE("identity tilt reproduces naive mc exactly under coupled seeds") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(24, 0.75);   // floor(nT) = 18 steps
    EventSpec ev;
    ev.functional = TestFunctional::tanh_of_c_at(0.75, 3);
    ev.threshold = 0.05;
    ev.direction = EventSpec::Direction::geq;

    const auto seq = StepKernelSequence::constant(pi, cfg);
    const auto is = importance_sample(ev, seq, cfg, nu, pi, act, 500, 321);
    const auto mc = naive_mc(ev, cfg, nu, pi, act, 500, 321);
    CHECK(is.p_hat == mc.p_hat);                    // exact, not approximate
    CHECK(is.ci_halfwidth == mc.ci_halfwidth);
    CHECK(is.ess == doctest::Approx(500.0));        // weights identically one
}

TEST_CASE("importance sampling stays unbiased under a real tilt") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const auto cfg = desk_cfg(64, 1.0);
    const auto f = TestFunctional::tanh_of_c_at(1.0, 3);

    // moderately likely event (around 20 percent)
    EventSpec ev;
    ev.functional = f;
    ev.threshold = 0.437;
    ev.direction = EventSpec::Direction::geq;

    const auto ce = cross_entropy_tilt(ev, cfg, nu, pi, act, 1000, 31);
    const auto is = importance_sample(ev, ce, cfg, nu, pi, act, 10000, 99, 2);
    const auto mc = naive_mc(ev, cfg, nu, pi, act, 10000, 99, 2);
    CHECK(mc.p_hat > 0.05);
    CHECK(std::abs(is.p_hat - mc.p_hat) <= is.ci_halfwidth + mc.ci_halfwidth);
}

TEST_CASE("cross-entropy tilt turns an unobserved event into a measurable one") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const auto cfg = desk_cfg(64, 1.0);
    const auto f = TestFunctional::tanh_of_c_at(1.0, 3);

    EventSpec ev;
    ev.functional = f;
    ev.threshold = 0.465;   // beyond the reach of a couple hundred naive draws
    ev.direction = EventSpec::Direction::geq;

    const auto mc = naive_mc(ev, cfg, nu, pi, act, 200, 12);
    CHECK(mc.p_hat == 0.0);

    const auto ce = cross_entropy_tilt(ev, cfg, nu, pi, act, 6000, 13);
    const auto is = importance_sample(ev, ce, cfg, nu, pi, act, 4000, 14, 2);
    CHECK(is.p_hat > 0.0);
    CHECK(std::isfinite(is.ci_halfwidth));
    CHECK(is.ci_halfwidth < is.p_hat);   // meaningfully resolved
}

TEST_CASE("cross-entropy tilt with an impossible pilot falls back to pi") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(16, 0.5);
    EventSpec ev;
    ev.functional = TestFunctional::tanh_of_c_at(0.5, 3);
    ev.threshold = 2.0;   // tanh never reaches 2
    ev.direction = EventSpec::Direction::geq;
    const auto ce = cross_entropy_tilt(ev, cfg, nu, pi, act, 50, 5);
    for (std::size_t k = 0; k < ce.steps(); ++k)
        for (std::size_t j = 0; j < pi.size(); ++j) CHECK(ce.kernel(k)[j] == pi.probs[j]);
}

TEST_CASE("rate estimate vanishes at the mean-field value") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const double T = 0.5;
    const auto opt = small_opt(T);
    const auto f = TestFunctional::tanh_of_c_at(T, 3);

    auto [ref, rep] = lln_reference(nu, pi, T, opt.dt, act);
    REQUIRE(rep.converged);
    const double star = empirical_expectation(ref.to_trajectory_measure(), f);

    const RateEstimate est = estimate_I(star, f, nu, pi, act, opt);
    CHECK(est.feasible);
    CHECK(std::abs(est.value) < 1e-12);
    CHECK(est.constraint_gap < 1e-12);
    for (std::size_t b = 0; b < est.tilt.blocks(); ++b)
        for (std::size_t j = 0; j < pi.size(); ++j)
            CHECK(est.tilt.row(b)[j] == doctest::Approx(pi.probs[j]).epsilon(1e-12));

    const RateEstimate estJ = estimate_J(star, f, nu, pi, act, opt);
    CHECK(estJ.feasible);
    CHECK(std::abs(estJ.value) < 1e-12);
    for (std::size_t j = 0; j < nu.size(); ++j)
        CHECK(estJ.nu0_weights[j] == doctest::Approx(nu.probs[j]).epsilon(1e-12));
}

TEST_CASE("rate estimates grow with the shift and respect J <= I") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const double T = 1.0;
    const auto opt = small_opt(T);
    const auto f = TestFunctional::tanh_of_c_at(T, 3);

    auto [ref, rep] = lln_reference(nu, pi, T, opt.dt, act);
    REQUIRE(rep.converged);
    const double star = empirical_expectation(ref.to_trajectory_measure(), f);

    OptimizerConfig full = opt;   // the far shift needs the full default budget
    full.outer_iters = 8;
    full.inner_iters = 40;
    const RateEstimate near = estimate_I(star + 0.02, f, nu, pi, act, opt);
    const RateEstimate far = estimate_I(star + 0.05, f, nu, pi, act, full);
    CHECK(near.feasible);
    CHECK(far.feasible);
    CHECK(near.value > 0.0);
    CHECK(far.value > near.value);

    const RateEstimate annealed = estimate_J(star + 0.02, f, nu, pi, act, opt);
    CHECK(annealed.feasible);
    CHECK(annealed.value <= near.value + 1e-9);
    CHECK(annealed.value == doctest::Approx(annealed.entropy_cost + annealed.init_cost));
}

TEST_CASE("a target reachable by reweighting alone is paid for in H(nu0|nu)") {
    // short horizon: the data tilt barely moves tanh(c_T), but shifting
    // initial mass toward high-c atoms reaches the target directly
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const double T = 0.25;
    OptimizerConfig opt;
    opt.horizon = T;
    opt.dt = 1.0 / 32.0;
    opt.blocks = 1;
    opt.outer_iters = 5;
    opt.inner_iters = 20;
    const auto f = TestFunctional::tanh_of_c_at(T, 3);
    auto [ref, rep] = lln_reference(nu, pi, T, opt.dt, act);
    const double target = empirical_expectation(ref.to_trajectory_measure(), f) + 0.05;

    const RateEstimate estJ = estimate_J(target, f, nu, pi, act, opt);
    const RateEstimate estI = estimate_I(target, f, nu, pi, act, opt);
    CHECK(estJ.feasible);
    CHECK_FALSE(estI.feasible);              // out of reach for the data tilt
    CHECK(estJ.init_cost > 100.0 * estJ.entropy_cost);
    for (std::size_t j = 0; j < pi.size(); ++j)
        CHECK(estJ.tilt.row(0)[j] == doctest::Approx(pi.probs[j]).epsilon(0.02));
}

TEST_CASE("tilted decay stays measurable where naive rows are flagged") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const auto cfg = desk_cfg(32, 1.0);
    const auto f = TestFunctional::tanh_of_c_at(1.0, 3);

    EventSpec ev;
    ev.functional = f;
    ev.threshold = 0.465;
    ev.direction = EventSpec::Direction::geq;

    const auto base = TiltedKernel::constant(pi, 1.0);
    const auto naive_rows =
        decay_curve(ev, {64, 128}, DecayMethod::naive, base, cfg, nu, pi, act, 400, 21, 2);
    CHECK(naive_rows.back().flagged);        // unobserved at this budget

    // reuse the cross-entropy row as a block kernel for the sampler
    const auto ce = cross_entropy_tilt(ev, desk_cfg(64, 1.0), nu, pi, act, 6000, 13, 0.25, 2);
    TiltedKernel rho = TiltedKernel::constant(pi, 1.0);
    std::copy(ce.kernel(0).begin(), ce.kernel(0).end(), rho.row_mut(0).begin());
    const auto tilted_rows =
        decay_curve(ev, {64, 128}, DecayMethod::tilted, rho, cfg, nu, pi, act, 4000, 21, 2);
    for (const auto& r : tilted_rows) {
        CHECK_FALSE(r.flagged);
        CHECK(r.rate > 0.0);
    }
}

TEST_CASE("widening the block family never hurts (nested feasible sets)") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const double T = 1.0;
    const auto f = TestFunctional::tanh_of_c_at(T, 3);

    auto [ref, rep] = lln_reference(nu, pi, T, 1.0 / 64.0, act);
    const double star = empirical_expectation(ref.to_trajectory_measure(), f);

    auto opt1 = small_opt(T);
    opt1.blocks = 1;
    auto opt4 = small_opt(T);
    opt4.blocks = 4;
    const RateEstimate b1 = estimate_I(star + 0.03, f, nu, pi, act, opt1);
    const RateEstimate b4 = estimate_I(star + 0.03, f, nu, pi, act, opt4);
    REQUIRE(b1.feasible);
    REQUIRE(b4.feasible);
    CHECK(b4.value <= b1.value + 5e-3);   // optimizer slack, same budget
}

TEST_CASE("optimizer trace objectives are nonincreasing within each outer round") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const double T = 1.0;
    const auto opt = small_opt(T);
    const auto f = TestFunctional::tanh_of_c_at(T, 3);

    auto [ref, rep] = lln_reference(nu, pi, T, opt.dt, act);
    const double star = empirical_expectation(ref.to_trajectory_measure(), f);
    const RateEstimate est = estimate_I(star + 0.03, f, nu, pi, act, opt);
    REQUIRE(est.trace.size() > 1);
    for (std::size_t i = 1; i < est.trace.size(); ++i) {
        if (est.trace[i].outer != est.trace[i - 1].outer) continue;
        CHECK(est.trace[i].objective <= est.trace[i - 1].objective + 1e-12);
    }
}

TEST_CASE("decay curve: rare event rates are positive, contained event is free") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = spread_data();
    const auto nu = clustered_weights();
    const auto cfg = desk_cfg(32, 1.0);
    const auto f = TestFunctional::tanh_of_c_at(1.0, 3);

    EventSpec rare;
    rare.functional = f;
    rare.threshold = 0.45;
    rare.direction = EventSpec::Direction::geq;
    const auto rho = TiltedKernel::constant(pi, 1.0);
    const auto naive_rows =
        decay_curve(rare, {16, 32, 64}, DecayMethod::naive, rho, cfg, nu, pi, act, 1500, 3, 2);
    for (const auto& r : naive_rows)
        if (!r.flagged) CHECK(r.rate > 0.0);

    EventSpec contains_star;
    contains_star.functional = f;
    contains_star.threshold = 0.2;   // well above all mass的 right? star ~ 0.42: use leq
    contains_star.direction = EventSpec::Direction::geq;
    const auto easy_rows = decay_curve(contains_star, {16, 32}, DecayMethod::naive, rho, cfg, nu,
                                       pi, act, 400, 3, 2);
    for (const auto& r : easy_rows) {
        CHECK_FALSE(r.flagged);
        CHECK(r.rate < 0.02);   // p_hat near 1
    }
}

TEST_CASE("lln experiment medians shrink with n") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(16, 0.5);
    const auto f = TestFunctional::tanh_of_c_at(0.5, 3);

    const auto rows = lln_experiment(f, {16, 64, 256}, 24, cfg, nu, pi, act, 1.0 / 64.0, 42, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].median_abs_error > rows[1].median_abs_error);
    CHECK(rows[1].median_abs_error > rows[2].median_abs_error);

    // f = 1 has zero error at any n
    const auto flat = lln_experiment(TestFunctional::constant_one(), {16}, 4, cfg, nu, pi, act,
                                     1.0 / 64.0, 42);
    CHECK(flat[0].median_abs_error == 0.0);
    CHECK(flat[0].iqr == 0.0);
}

TEST_CASE("replica parallelism does not change results") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto cfg = desk_cfg(24, 0.5);
    EventSpec ev;
    ev.functional = TestFunctional::tanh_of_c_at(0.5, 3);
    ev.threshold = 0.05;
    ev.direction = EventSpec::Direction::geq;
    const auto a = naive_mc(ev, cfg, nu, pi, act, 300, 9, 1);
    const auto b = naive_mc(ev, cfg, nu, pi, act, 300, 9, 4);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.sample_sd == b.sample_sd);
}

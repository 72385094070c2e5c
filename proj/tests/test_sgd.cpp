#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mfldp/checks.hpp"
#include "mfldp/model.hpp"
#include "mfldp/sgd.hpp"

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
        0.5,  0.3,  -0.2,
        -0.4, -0.6, 0.1,
        0.7,  0.2,  0.5,
        -0.2, 0.4,  -0.7,
        0.3,  -0.5, -0.3,
        -0.6, 0.1,  0.6,
        0.2,  0.7,  0.0,
        -0.1, -0.2, 0.4,
    };
    nu.probs.assign(8, 0.125);
    nu.finalize();
    return nu;
}

}  // namespace

TEST_CASE("sgd_step hand oracle") {
    const Activation act = make_activation(ActivationKind::tanh);
    ParamMeasure state;
    state.dim = 3;
    state.points = {1.0, 0.0, 0.0};
    state.weights = {1.0};
    const std::vector<double> z = {1.0, 1.0};
    const auto next = sgd_step(state, z, 2.0, 0.1, act);
    CHECK(next.point(0)[0] == doctest::Approx(1.0));
    CHECK(next.point(0)[1] == doctest::Approx(0.2));
    CHECK(next.point(0)[2] == doctest::Approx(0.2));
    CHECK(next.weights == state.weights);
}

TEST_CASE("sgd_step fixed point at zero residual") {
    const Activation act = make_activation(ActivationKind::tanh);
    ParamMeasure state;
    state.dim = 2;
    state.points = {0.5, 0.3, -0.5, 0.3};
    state.weights = {0.5, 0.5};
    const std::vector<double> z = {0.7};
    const double y = readout_F(z, state, act);   // perfect fit
    const auto next = sgd_step(state, z, y, 0.1, act);
    CHECK(next.points == state.points);
}

TEST_CASE("sgd_step is simultaneous: storage order does not matter") {
    const Activation act = make_activation(ActivationKind::tanh);
    ParamMeasure state;
    state.dim = 3;
    state.points = {0.4, 0.2, -0.1, -0.7, 0.5, 0.3};
    state.weights = {0.5, 0.5};
    ParamMeasure reversed;
    reversed.dim = 3;
    reversed.points = {-0.7, 0.5, 0.3, 0.4, 0.2, -0.1};
    reversed.weights = {0.5, 0.5};

    const std::vector<double> z = {0.9, -0.4};
    const auto a = sgd_step(state, z, 1.3, 0.05, act);
    const auto b = sgd_step(reversed, z, 1.3, 0.05, act);
    for (int c = 0; c < 3; ++c) {
        CHECK(a.point(0)[c] == b.point(1)[c]);
        CHECK(a.point(1)[c] == b.point(0)[c]);
    }
}

TEST_CASE("simulate: n' = 0 leaves the initial samples in place") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 4;
    cfg.horizon = 0.2;   // floor(4 * 0.2) = 0 steps
    cfg.dim_in = 2;
    REQUIRE(cfg.n_prime() == 0);
    const auto traj = simulate_theta_n(cfg, pi, nu, act, 5);
    CHECK(traj.grid_size() == 1);
    CHECK(traj.paths() == 4);
}

TEST_CASE("simulate determinism: same seed, same bits") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 32;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    const auto a = simulate_theta_n(cfg, pi, nu, act, 99);
    const auto b = simulate_theta_n(cfg, pi, nu, act, 99);
    CHECK(a.values == b.values);
    const auto c = simulate_theta_n(cfg, pi, nu, act, 100);
    CHECK(a.values != c.values);
}

TEST_CASE("pushforward single-atom single-step hand oracle") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    SimConfig cfg;
    cfg.n = 1;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    ParamMeasure nu0;
    nu0.dim = 3;
    nu0.points = {0.5, 0.1, -0.2};
    nu0.weights = {1.0};
    DataStream stream;
    stream.points = {2};   // third data atom
    const auto traj = pushforward_eta_n(nu0, stream, cfg, pi, act);
    REQUIRE(traj.grid_size() == 2);

    std::vector<double> a(3);
    gradient_A(pi.z_at(2), pi.y[2], nu0.point(0), nu0, act, a);
    for (int c = 0; c < 3; ++c)
        CHECK(traj.at(0, 1)[c] == doctest::Approx(nu0.points[c] + 1.0 * a[c]).epsilon(1e-15));
}

TEST_CASE("representation identity: pushforward of the empirical measure is pathwise exact") {
    const auto res = check_representation_identity(
        [] {
            SimConfig cfg;
            cfg.n = 100;
            cfg.horizon = 1.0;
            cfg.dim_in = 2;
            return cfg;
        }(),
        desk_data(), desk_weights(), make_activation(ActivationKind::tanh), 31);
    INFO(res.detail);
    CHECK(res.pass);
}

TEST_CASE("empty stream gives constant trajectories") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    SimConfig cfg;
    cfg.n = 2;
    cfg.horizon = 0.4;
    cfg.dim_in = 2;
    REQUIRE(cfg.n_prime() == 0);
    ParamMeasure nu0;
    nu0.dim = 3;
    nu0.points = {0.5, 0.1, -0.2, -0.3, 0.2, 0.6};
    nu0.weights = {0.5, 0.5};
    DataStream stream;
    const auto traj = pushforward_eta_n(nu0, stream, cfg, pi, act);
    CHECK(traj.grid_size() == 1);
    CHECK(traj.values == nu0.points);
}

TEST_CASE("growth bound holds and scales with the horizon") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();

    SimConfig cfg;
    cfg.n = 50;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    const auto traj = simulate_theta_n(cfg, pi, nu, act, 17);
    const auto stream = draw_data_stream(cfg, pi, 17);
    const auto rep = growth_bound_report(traj, stream, cfg, pi, act);
    CHECK(rep.holds());
    CHECK(rep.bound / rep.observed_sup > 10.0);   // typical slack is large

    // doubling T scales the (T^2+1) envelope up by at least that ratio
    SimConfig cfg2 = cfg;
    cfg2.horizon = 2.0;
    const auto traj2 = simulate_theta_n(cfg2, pi, nu, act, 17);
    const auto stream2 = draw_data_stream(cfg2, pi, 17);
    const auto rep2 = growth_bound_report(traj2, stream2, cfg2, pi, act);
    CHECK(rep2.holds());
    CHECK(rep2.bound > rep.bound);
}

TEST_CASE("growth bound with y = 0, z = 0 data") {
    const Activation act = make_activation(ActivationKind::tanh);
    DataAtomSet pi;
    pi.dim_in = 2;
    pi.z = {0.0, 0.0};
    pi.y = {0.0};
    pi.probs = {1.0};
    pi.finalize();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 20;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    const auto traj = simulate_theta_n(cfg, pi, nu, act, 3);
    const auto stream = draw_data_stream(cfg, pi, 3);
    const auto rep = growth_bound_report(traj, stream, cfg, pi, act);
    CHECK(rep.y_star_4 == 0.0);
    CHECK(rep.z_star_2 == doctest::Approx(1.0));   // ||(1,0)|| = 1 per step, n' = n
    CHECK(rep.holds());
}

TEST_CASE("strided storage keeps endpoints and the exact sup") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 64;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    StorageBudget tiny;
    tiny.max_doubles = 2048;   // force striding
    const auto strided = simulate_theta_n(cfg, pi, nu, act, 11, tiny);
    const auto dense = simulate_theta_n(cfg, pi, nu, act, 11);
    CHECK(strided.stride > 1);
    CHECK(strided.grid.front() == 0.0);
    CHECK(strided.grid.back() == dense.grid.back());
    CHECK(strided.observed_sup == dense.observed_sup);
    // stored columns agree with the dense run
    for (std::size_t i = 0; i < strided.paths(); ++i) {
        const auto a = strided.at(i, strided.grid_size() - 1);
        const auto b = dense.at(i, dense.grid_size() - 1);
        for (int c = 0; c < 3; ++c) CHECK(a[c] == b[c]);
    }
}

TEST_CASE("growth constant is monotone in the horizon") {
    // at fixed realized data moments the bound envelope scales at least by
    // the (T^2+1) ratio, because c_sgd itself never shrinks with T
    double prev = 0.0;
    for (double t = 0.25; t <= 4.0; t += 0.25) {
        const double c = assemble_c_sgd(1.0, 1.5, t);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("empirical expectation examples") {
    TrajectoryMeasure traj;
    traj.dim = 3;
    traj.grid = {0.0, 1.0};
    traj.values = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0};   // constant path at c = 1
    traj.weights = {1.0};

    CHECK(empirical_expectation(traj, TestFunctional::constant_one()) == 1.0);
    const auto f = TestFunctional::tanh_of_c_at(1.0, 3);
    CHECK(empirical_expectation(traj, f) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
}

TEST_CASE("expectation is linear under trajectory-measure mixtures") {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 16;
    cfg.horizon = 0.5;
    cfg.dim_in = 2;
    const auto t1 = simulate_theta_n(cfg, pi, nu, act, 1);
    const auto t2 = simulate_theta_n(cfg, pi, nu, act, 2);
    const double alpha = 0.3;

    TrajectoryMeasure mix;
    mix.dim = t1.dim;
    mix.grid = t1.grid;
    mix.values = t1.values;
    mix.values.insert(mix.values.end(), t2.values.begin(), t2.values.end());
    for (double w : t1.weights) mix.weights.push_back(alpha * w);
    for (double w : t2.weights) mix.weights.push_back((1.0 - alpha) * w);

    const auto f = TestFunctional::tanh_of_c_at(0.5, 3);
    const double lhs = empirical_expectation(mix, f);
    const double rhs = alpha * empirical_expectation(t1, f) +
                       (1.0 - alpha) * empirical_expectation(t2, f);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

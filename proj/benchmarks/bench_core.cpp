#include <benchmark/benchmark.h>

#include "mfldp/ldp.hpp"
#include "mfldp/meanfield.hpp"
#include "mfldp/rng.hpp"
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
        0.5,  0.3,  -0.2, -0.4, -0.6, 0.1,  0.7,  0.2,  0.5,  -0.2, 0.4,  -0.7,
        0.3,  -0.5, -0.3, -0.6, 0.1,  0.6,  0.2,  0.7,  0.0,  -0.1, -0.2, 0.4,
    };
    nu.probs.assign(8, 0.125);
    nu.finalize();
    return nu;
}

void BM_simulate_theta_n(benchmark::State& state) {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_theta_n(cfg, pi, nu, act, seed++));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_prime() * cfg.n);
}
BENCHMARK(BM_simulate_theta_n)->Arg(64)->Arg(256)->Arg(1024);

void BM_picard_solve(benchmark::State& state) {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    const auto rho = TiltedKernel::constant(pi, 0.5);
    const double dt = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(picard_solve(rho, pi, nu, dt, act));
    }
}
BENCHMARK(BM_picard_solve)->Arg(64)->Arg(128)->Arg(256);

void BM_relative_entropy(benchmark::State& state) {
    const auto pi = desk_data();
    RngStream rng(1);
    TiltedKernel rho = TiltedKernel::constant_blocks(pi, 1.0, 64);
    std::vector<double> pot(pi.size());
    for (std::size_t b = 0; b < rho.blocks(); ++b) {
        for (double& p : pot) p = rng.uniform();
        const auto row = exponential_tilt(pi, pot, 1.0);
        std::copy(row.begin(), row.end(), rho.row_mut(b).begin());
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(relative_entropy_R(rho, pi));
    }
}
BENCHMARK(BM_relative_entropy);

void BM_importance_sample(benchmark::State& state) {
    const Activation act = make_activation(ActivationKind::tanh);
    const auto pi = desk_data();
    const auto nu = desk_weights();
    SimConfig cfg;
    cfg.n = 64;
    cfg.horizon = 1.0;
    cfg.dim_in = 2;
    EventSpec ev;
    ev.functional = TestFunctional::tanh_of_c_at(1.0, 3);
    ev.threshold = 0.1;
    ev.direction = EventSpec::Direction::geq;
    const auto seq = StepKernelSequence::constant(pi, cfg);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            importance_sample(ev, seq, cfg, nu, pi, act, state.range(0), seed++));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_importance_sample)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();

#include "mfldp/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfldp/model.hpp"

namespace mfldp {

ParamMeasure sgd_step(const ParamMeasure& state, std::span<const double> z, double y,
                      double eps, const Activation& act) {
    if (!(eps > 0.0)) throw std::invalid_argument("sgd_step: eps must be > 0");
    // residual of the frozen pre-update measure, shared by every particle
    const double g = loss_residual_g(z, y, state, act);
    ParamMeasure next = state;
    std::vector<double> grad(static_cast<std::size_t>(state.dim));
    for (std::size_t i = 0; i < state.size(); ++i) {
        gradient_A_given_g(z, g, state.point(i), act, grad);
        auto p = next.point_mut(i);
        for (std::size_t c = 0; c < p.size(); ++c) p[c] += eps * grad[c];
    }
    return next;
}

DataStream draw_data_stream(const SimConfig& cfg, const DataAtomSet& pi, std::uint64_t seed) {
    cfg.validate();
    DataStream ds;
    ds.source = DataStream::Source::iid_pi;
    ds.seed = seed;
    const long steps = cfg.n_prime();
    ds.points.resize(static_cast<std::size_t>(steps));
    const auto cdf = cumulative_probs(pi.probs);
    RngStream rng = RngStream(seed).derive(kDataSubStream);
    for (long k = 0; k < steps; ++k)
        ds.points[static_cast<std::size_t>(k)] = rng.categorical_cdf(cdf);
    return ds;
}

ParamMeasure draw_initial_particles(const SimConfig& cfg, const InitialWeightAtomSet& nu,
                                    std::uint64_t seed) {
    cfg.validate();
    if (nu.dim != cfg.dim()) throw std::invalid_argument("initial draw: dimension mismatch");
    ParamMeasure mu;
    mu.dim = nu.dim;
    const std::size_t n = static_cast<std::size_t>(cfg.n);
    mu.weights.assign(n, 1.0 / static_cast<double>(cfg.n));
    mu.points.resize(n * static_cast<std::size_t>(nu.dim));
    const auto cdf = cumulative_probs(nu.probs);
    RngStream rng = RngStream(seed).derive(kInitSubStream);
    for (std::size_t i = 0; i < n; ++i) {
        const auto atom = nu.atom(rng.categorical_cdf(cdf));
        std::copy(atom.begin(), atom.end(), mu.points.begin() + i * static_cast<std::size_t>(nu.dim));
    }
    return mu;
}

TrajectoryMeasure pushforward_eta_n(const ParamMeasure& nu0, const DataStream& stream,
                                    const SimConfig& cfg, const DataAtomSet& pi,
                                    const Activation& act, StorageBudget budget) {
    nu0.validate();
    const long steps = cfg.n_prime();
    if (static_cast<long>(stream.size()) != steps)
        throw std::invalid_argument("pushforward: stream length does not match floor(nT)");
    if (nu0.dim != cfg.dim()) throw std::invalid_argument("pushforward: dimension mismatch");

    const std::size_t count = nu0.size();
    const std::size_t d = static_cast<std::size_t>(nu0.dim);
    const double n_real = static_cast<double>(cfg.n);

    // choose storage stride; k = 0 and k = steps are always kept
    long stride = 1;
    {
        const std::size_t dense = count * static_cast<std::size_t>(steps + 1) * d;
        while (stride < steps && dense / static_cast<std::size_t>(stride) > budget.max_doubles)
            stride *= 2;
    }
    std::vector<long> stored_ks;
    for (long k = 0; k <= steps; k += stride) stored_ks.push_back(k);
    if (stored_ks.back() != steps) stored_ks.push_back(steps);

    TrajectoryMeasure traj;
    traj.dim = nu0.dim;
    traj.interpolation = Interpolation::piecewise_constant;
    traj.weights = nu0.weights;
    traj.stride = stride;
    traj.grid.reserve(stored_ks.size());
    for (long k : stored_ks) traj.grid.push_back(static_cast<double>(k) / n_real);
    traj.values.assign(count * stored_ks.size() * d, 0.0);

    ParamMeasure state = nu0;
    double sup = 0.0;
    std::size_t next_store = 0;
    std::vector<double> grad(d);
    const double eps = cfg.learning_rate();

    auto store_column = [&](std::size_t col) {
        for (std::size_t i = 0; i < count; ++i) {
            const auto p = state.point(i);
            std::copy(p.begin(), p.end(),
                      traj.values.begin() + (i * stored_ks.size() + col) * d);
        }
    };
    auto track_sup = [&]() {
        for (std::size_t i = 0; i < count; ++i) sup = std::max(sup, norm2(state.point(i)));
    };

    track_sup();
    store_column(next_store++);
    for (long k = 1; k <= steps; ++k) {
        const std::size_t a = stream.points[static_cast<std::size_t>(k - 1)];
        const auto z = pi.z_at(a);
        const double g = loss_residual_g(z, pi.y[a], state, act);
        for (std::size_t i = 0; i < count; ++i) {
            gradient_A_given_g(z, g, state.point(i), act, grad);
            auto p = state.point_mut(i);
            for (std::size_t c = 0; c < d; ++c) p[c] += eps * grad[c];
        }
        track_sup();
        if (next_store < stored_ks.size() && stored_ks[next_store] == k) store_column(next_store++);
    }
    traj.observed_sup = sup;
    return traj;
}

TrajectoryMeasure simulate_theta_n(const SimConfig& cfg, const DataAtomSet& pi,
                                   const InitialWeightAtomSet& nu, const Activation& act,
                                   std::uint64_t seed, StorageBudget budget) {
    const ParamMeasure init = draw_initial_particles(cfg, nu, seed);
    const DataStream stream = draw_data_stream(cfg, pi, seed);
    return pushforward_eta_n(init, stream, cfg, pi, act, budget);
}

// Conservative explicit C_sgd for the bound
//   (1/n) sum_k ||A_k|| <= C_sgd (T^2+1) (1 + Y4 + Z2),
// where Y4 = (1/n) sum |Y_k|^4 and Z2 = (1/n) sum ||(1,Z_k)||^2. Chain, with
// Y1, Y2, Z1, S = (1/n) sum |Y_k| ||(1,Z_k)|| and K = exp(C_sigma^2 T):
//   mean |c| of the cloud:   m_k <= K (C_nu + C_sigma Y1)          (step recursion)
//   residual:                |g_k| <= |Y_k| + C_sigma m
//   per-particle weight:     |c_k| <= C_nu + C_sigma Y1 + T C_sigma^2 K (C_nu + C_sigma Y1)
//   update norm:             ||A_k|| <= |g_k| C_sigma (1 + |c|) ||(1, Z_k)||
// Averaging and eliminating Y1, Y2, Z1, S through Cauchy-Schwarz
// (Y1^2 <= T Y2, Y2^2 <= T Y4, Z1^2 <= T Z2, S^2 <= Y2 Z2) leaves a
// coefficient against each of 1, Y4, Z2; the max of the three, divided by
// (T^2+1), is C_sgd.
double assemble_c_sgd(double c_sigma, double c_nu, double horizon) {
    const double T = horizon;
    const double sqT = std::sqrt(T);
    const double K = std::exp(c_sigma * c_sigma * T);
    const double s2 = c_sigma * c_sigma;
    const double s3 = s2 * c_sigma;

    // (1/n) sum ||A|| <= c_sigma P [ u1 S + u2 Z1 + u3 Y1 Z1 + u4 Y1 S + u5 Y1^2 Z1 ]
    const double P = 1.0 + T * s2 * K;
    const double u1 = 2.0 * c_nu;
    const double u2 = 2.0 * c_nu * c_nu * c_sigma * K;
    const double u3 = 3.0 * c_nu * s2 * K;
    const double u4 = c_sigma;
    const double u5 = s3 * K;

    // each starred product bounded by alpha + beta Y4 + gamma Z2:
    //   S       <= 1/4 + (T/4) Y4 + (1/2) Z2
    //   Z1      <= 1/2 + (T/2) Z2
    //   Y1 Z1   <= T/4 + (T^2/4) Y4 + (T/2) Z2
    //   Y1 S    <= sqrt(T)/2 (T Y4 + Z2)
    //   Y1^2 Z1 <= T^(3/2)/2 (T Y4 + Z2)
    const double alpha = u1 * 0.25 + u2 * 0.5 + u3 * T * 0.25;
    const double beta = u1 * T * 0.25 + u3 * T * T * 0.25 + u4 * sqT * T * 0.5 +
                        u5 * sqT * T * T * 0.5;
    const double gamma = u1 * 0.5 + u2 * T * 0.5 + u3 * T * 0.5 + u4 * sqT * 0.5 +
                         u5 * sqT * T * 0.5;

    const double coeff = c_sigma * P * std::max({alpha, beta, gamma});
    return std::max(coeff / (T * T + 1.0), 1.0000001);
}

GrowthBoundReport growth_bound_report(const TrajectoryMeasure& traj, const DataStream& stream,
                                      const SimConfig& cfg, const DataAtomSet& pi,
                                      const Activation& act) {
    GrowthBoundReport rep;
    const double n_real = static_cast<double>(cfg.n);
    for (std::size_t k = 0; k < stream.size(); ++k) {
        const std::size_t a = stream.points[k];
        const double ay = std::abs(pi.y[a]);
        const auto z = pi.z_at(a);
        const double az = std::sqrt(1.0 + dot(z, z));
        rep.y_star_1 += ay;
        rep.y_star_2 += ay * ay;
        rep.y_star_4 += ay * ay * ay * ay;
        rep.z_star_1 += az;
        rep.z_star_2 += az * az;
    }
    rep.y_star_1 /= n_real;
    rep.y_star_2 /= n_real;
    rep.y_star_4 /= n_real;
    rep.z_star_1 /= n_real;
    rep.z_star_2 /= n_real;

    // support radius of the realized initial cloud (grid column 0)
    double c_nu = 1.0;
    for (std::size_t i = 0; i < traj.paths(); ++i) c_nu = std::max(c_nu, norm2(traj.at(i, 0)));
    rep.c_nu = c_nu;

    const double T = cfg.horizon;
    const double cs = act.c_sigma;
    rep.c_bar = 2.0 * (1.0 + T) * cs * cs * cs * std::exp(cs * cs * T);
    rep.c_sgd = assemble_c_sgd(cs, c_nu, T);
    rep.bound = c_nu + rep.c_sgd * (T * T + 1.0) * (1.0 + rep.y_star_4 + rep.z_star_2);
    rep.observed_sup = traj.observed_sup;
    return rep;
}

}  // namespace mfldp

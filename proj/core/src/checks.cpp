#include "mfldp/checks.hpp"

#include <cmath>
#include <sstream>

#include "mfldp/model.hpp"
#include "mfldp/rng.hpp"
#include "mfldp/sgd.hpp"

namespace mfldp {

namespace {

std::string fmt_pair(const char* a, double va, const char* b, double vb) {
    std::ostringstream os;
    os << a << "=" << va << " " << b << "=" << vb;
    return os.str();
}

// One-sample quadratic loss with particle i moved to theta, every other
// particle of mu left in place.
double one_sample_loss(std::span<const double> z, double y, const ParamMeasure& mu,
                       std::size_t i, std::span<const double> theta, const Activation& act) {
    ParamMeasure shifted = mu;
    std::copy(theta.begin(), theta.end(), shifted.point_mut(i).begin());
    const double g = loss_residual_g(z, y, shifted, act);
    return 0.5 * g * g;
}

}  // namespace

CheckResult check_gradient_oracle(const Activation& act, int instances, std::uint64_t seed,
                                  double fd_step, double rel_tol) {
    RngStream rng(seed, 0x9Dull);
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        const int d_in = 1 + static_cast<int>(rng.next_u64() % 3);
        const std::size_t count = 2 + rng.next_u64() % 7;
        const int d = d_in + 1;
        ParamMeasure mu;
        mu.dim = d;
        mu.weights.assign(count, 1.0 / static_cast<double>(count));
        mu.points.resize(count * static_cast<std::size_t>(d));
        for (double& p : mu.points) p = 2.0 * rng.uniform() - 1.0;
        std::vector<double> z(static_cast<std::size_t>(d_in));
        for (double& c : z) c = 3.0 * rng.uniform() - 1.5;
        // offset y so the residual is bounded away from zero
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double y = readout_F(z, mu, act) + sign * (0.5 + 1.5 * rng.uniform());
        const std::size_t i = rng.next_u64() % count;

        std::vector<double> a(static_cast<std::size_t>(d));
        gradient_A(z, y, mu.point(i), mu, act, a);

        // -count * central difference of the loss in particle i's coordinates
        std::vector<double> a_fd(static_cast<std::size_t>(d));
        std::vector<double> theta(mu.point(i).begin(), mu.point(i).end());
        for (int c = 0; c < d; ++c) {
            const double keep = theta[static_cast<std::size_t>(c)];
            theta[static_cast<std::size_t>(c)] = keep + fd_step;
            const double up = one_sample_loss(z, y, mu, i, theta, act);
            theta[static_cast<std::size_t>(c)] = keep - fd_step;
            const double dn = one_sample_loss(z, y, mu, i, theta, act);
            theta[static_cast<std::size_t>(c)] = keep;
            a_fd[static_cast<std::size_t>(c)] =
                -static_cast<double>(count) * (up - dn) / (2.0 * fd_step);
        }
        double diff2 = 0.0, ref2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double dd = a[static_cast<std::size_t>(c)] - a_fd[static_cast<std::size_t>(c)];
            diff2 += dd * dd;
            ref2 += a_fd[static_cast<std::size_t>(c)] * a_fd[static_cast<std::size_t>(c)];
        }
        worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-12));
    }
    CheckResult res;
    res.name = "gradient_oracle";
    res.pass = worst < rel_tol;
    res.detail = fmt_pair("max_rel_err", worst, "tol", rel_tol);
    return res;
}

CheckResult check_entropy_inequality_random(const DataAtomSet& pi, int kernels,
                                            const std::vector<int>& n_values,
                                            std::uint64_t seed) {
    RngStream rng(seed, 0xE7ull);
    double worst_violation = -kInfiniteEntropy;
    double worst_identity = 0.0;
    for (int k = 0; k < kernels; ++k) {
        const std::size_t blocks = 1 + rng.next_u64() % 8;
        TiltedKernel rho = TiltedKernel::constant_blocks(pi, 1.0, blocks);
        std::vector<double> pot(pi.size());
        for (std::size_t b = 0; b < blocks; ++b) {
            for (double& p : pot) p = 4.0 * rng.uniform() - 2.0;
            const auto row = exponential_tilt(pi, pot, 1.0);
            std::copy(row.begin(), row.end(), rho.row_mut(b).begin());
        }
        for (int n : n_values) {
            const auto res = check_entropy_inequality(rho, pi, n);
            worst_violation = std::max(worst_violation, res.lhs - res.rhs);
            // step-entropy identity: (1/n) sum H(pi_k | pi) = R(assembled)
            const auto seq = discretize_kernel(rho, n);
            double step_sum = 0.0;
            for (std::size_t s = 0; s < seq.steps(); ++s)
                step_sum += kl_divergence(seq.kernel(s), pi.probs);
            step_sum /= static_cast<double>(n);
            worst_identity = std::max(worst_identity, std::abs(step_sum - res.lhs));
        }
    }
    CheckResult res;
    res.name = "entropy_inequality";
    res.pass = worst_violation < 1e-12 && worst_identity < 1e-12;
    res.detail = fmt_pair("max_violation", worst_violation, "max_identity_err", worst_identity);
    return res;
}

CheckResult check_representation_identity(const SimConfig& cfg, const DataAtomSet& pi,
                                          const InitialWeightAtomSet& nu, const Activation& act,
                                          std::uint64_t seed) {
    const TrajectoryMeasure sim = simulate_theta_n(cfg, pi, nu, act, seed);
    // empirical measure of the sampled particles, coupled data stream
    ParamMeasure nu0;
    nu0.dim = sim.dim;
    nu0.weights.assign(sim.paths(), 1.0 / static_cast<double>(cfg.n));
    nu0.points.resize(sim.paths() * static_cast<std::size_t>(sim.dim));
    for (std::size_t i = 0; i < sim.paths(); ++i) {
        const auto p = sim.at(i, 0);
        std::copy(p.begin(), p.end(), nu0.points.begin() + i * static_cast<std::size_t>(sim.dim));
    }
    const DataStream stream = draw_data_stream(cfg, pi, seed);
    const TrajectoryMeasure push = pushforward_eta_n(nu0, stream, cfg, pi, act);

    double max_dev = 0.0;
    if (sim.values.size() != push.values.size()) {
        max_dev = kInfiniteEntropy;
    } else {
        for (std::size_t i = 0; i < sim.values.size(); ++i)
            max_dev = std::max(max_dev, std::abs(sim.values[i] - push.values[i]));
    }
    CheckResult res;
    res.name = "representation_identity";
    res.pass = max_dev == 0.0;
    res.detail = fmt_pair("max_abs_dev", max_dev, "required", 0.0);
    return res;
}

CheckResult check_contraction(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                              const Activation& act, double horizon) {
    const double c = contraction_constant(nu, pi, act, horizon);
    const double t0 = std::min(horizon, 1.0 / (2.0 * c));
    const double bound = t0 * c + 0.1;
    PicardOptions opts;
    opts.tol = 1e-12;   // keep iterating into the contraction regime
    opts.max_iter = 50;
    const TiltedKernel rho = TiltedKernel::constant(pi, t0);
    auto [sol, rep] = picard_solve(rho, pi, nu, t0 / 16.0, act, opts);
    double worst = 0.0;
    for (double r : rep.contraction_ratios) worst = std::max(worst, r);
    CheckResult res;
    res.name = "contraction";
    res.pass = rep.converged && !rep.contraction_ratios.empty() && worst <= bound;
    res.detail = fmt_pair("max_ratio", worst, "bound", bound);
    return res;
}

CheckResult check_euler_order(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                              const Activation& act, double horizon, double dt) {
    PicardOptions opts;
    opts.tol = 1e-11;
    const TiltedKernel rho = TiltedKernel::constant(pi, horizon);
    auto [coarse, rep1] = picard_solve(rho, pi, nu, dt, act, opts);
    auto [fine, rep2] = picard_solve(rho, pi, nu, dt / 2.0, act, opts);
    CheckResult res;
    res.name = "euler_order";
    if (!rep1.converged || !rep2.converged) {
        res.pass = false;
        res.detail = "picard did not converge";
        return res;
    }
    double lo = kInfiniteEntropy, hi = 0.0;
    const int d = nu.dim;
    for (int i = 0; i < d; ++i) {
        for (int j = -1; j < d; ++j) {
            if (j >= 0 && j < i) continue;   // monomials x_i x_j with i <= j
            const MonomialSpec f{i, j};
            const double rc = evt_residual(coarse, rho, pi, f, act);
            const double rf = evt_residual(fine, rho, pi, f, act);
            const double ratio = rc / rf;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    res.pass = lo >= 1.5 && hi <= 3.0;
    res.detail = fmt_pair("min_ratio", lo, "max_ratio", hi);
    return res;
}

CheckResult check_growth_bound(const SimConfig& cfg, const DataAtomSet& pi,
                               const InitialWeightAtomSet& nu, const Activation& act,
                               std::uint64_t seed) {
    const TrajectoryMeasure traj = simulate_theta_n(cfg, pi, nu, act, seed);
    const DataStream stream = draw_data_stream(cfg, pi, seed);
    const GrowthBoundReport rep = growth_bound_report(traj, stream, cfg, pi, act);
    CheckResult res;
    res.name = "growth_bound";
    res.pass = rep.holds();
    res.detail = fmt_pair("observed_sup", rep.observed_sup, "bound", rep.bound);
    return res;
}

}  // namespace mfldp

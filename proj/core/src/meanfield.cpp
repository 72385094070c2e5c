#include "mfldp/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfldp/model.hpp"

namespace mfldp {

MeanFieldSolution MeanFieldSolution::constant_from(const InitialWeightAtomSet& nu, double horizon,
                                                   double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("meanfield: dt and horizon must be positive");
    MeanFieldSolution sol;
    sol.dim = nu.dim;
    const std::size_t cells = static_cast<std::size_t>(
        std::max<long>(1, std::llround(horizon / dt)));
    sol.dt = horizon / static_cast<double>(cells);    // snap so the grid ends exactly at T
    sol.grid.resize(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k)
        sol.grid[k] = horizon * static_cast<double>(k) / static_cast<double>(cells);
    sol.grid.back() = horizon;
    sol.weights = nu.probs;
    sol.values.resize(nu.size() * sol.grid.size() * static_cast<std::size_t>(nu.dim));
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const auto atom = nu.atom(j);
        for (std::size_t k = 0; k <= cells; ++k)
            std::copy(atom.begin(), atom.end(), sol.at_mut(j, k).begin());
    }
    return sol;
}

TrajectoryMeasure MeanFieldSolution::to_trajectory_measure() const {
    TrajectoryMeasure traj;
    traj.dim = dim;
    traj.grid = grid;
    traj.values = values;
    traj.weights = weights;
    traj.interpolation = Interpolation::piecewise_linear;
    double sup = 0.0;
    for (std::size_t j = 0; j < atoms(); ++j)
        for (std::size_t k = 0; k < grid_size(); ++k) sup = std::max(sup, norm2(at(j, k)));
    traj.observed_sup = sup;
    return traj;
}

namespace {

// rho averaged over every Euler cell, row-major cells x atoms.
std::vector<double> cell_rows(const TiltedKernel& rho, const std::vector<double>& grid) {
    const std::size_t cells = grid.size() - 1;
    std::vector<double> rows(cells * rho.atom_count);
    for (std::size_t k = 0; k < cells; ++k)
        rho.average_row(grid[k], grid[k + 1],
                        {rows.data() + k * rho.atom_count, rho.atom_count});
    return rows;
}

// residuals g(x, eta_k) for every data atom against one cloud column.
void residuals_at(const MeanFieldSolution& eta, std::size_t k, const DataAtomSet& pi,
                  const Activation& act, std::vector<double>& g_out) {
    g_out.assign(pi.size(), 0.0);
    for (std::size_t x = 0; x < pi.size(); ++x) {
        const auto z = pi.z_at(x);
        double f = 0.0;
        for (std::size_t j = 0; j < eta.atoms(); ++j) {
            const auto th = eta.at(j, k);
            f += eta.weights[j] * th[0] * act.value(dot(z, th.subspan(1)));
        }
        g_out[x] = pi.y[x] - f;
    }
}

// drift = sum_x row[x] A(x, theta; .) with residuals already evaluated.
void drift_at(std::span<const double> row, const DataAtomSet& pi,
              std::span<const double> g, std::span<const double> theta, const Activation& act,
              std::vector<double>& tmp, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t x = 0; x < pi.size(); ++x) {
        if (row[x] == 0.0) continue;
        gradient_A_given_g(pi.z_at(x), g[x], theta, act, tmp);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[x] * tmp[c];
    }
}

// Euler-integrates the cells [k0, k1) of `out` against the frozen cloud,
// leaving column k0 untouched. out and frozen share the grid.
void integrate_segment(const MeanFieldSolution& frozen, const std::vector<double>& rows,
                       const DataAtomSet& pi, const Activation& act, std::size_t k0,
                       std::size_t k1, MeanFieldSolution& out) {
    const std::size_t d = static_cast<std::size_t>(out.dim);
    std::vector<double> g, tmp(d), b(d);
    for (std::size_t k = k0; k < k1; ++k) {
        residuals_at(frozen, k, pi, act, g);
        const std::span<const double> row{rows.data() + k * pi.size(), pi.size()};
        const double h = out.grid[k + 1] - out.grid[k];
        for (std::size_t j = 0; j < out.atoms(); ++j) {
            const auto cur = out.at(j, k);
            drift_at(row, pi, g, cur, act, tmp, b);
            auto nxt = out.at_mut(j, k + 1);
            for (std::size_t c = 0; c < d; ++c) nxt[c] = cur[c] + h * b[c];
        }
    }
}

double segment_gap(const MeanFieldSolution& a, const MeanFieldSolution& b, std::size_t k0,
                   std::size_t k1) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.atoms(); ++j) {
        double sup2 = 0.0;
        for (std::size_t k = k0; k <= k1; ++k) {
            double d2 = 0.0;
            const auto x = a.at(j, k);
            const auto y = b.at(j, k);
            for (std::size_t c = 0; c < x.size(); ++c) {
                const double dc = x[c] - y[c];
                d2 += dc * dc;
            }
            sup2 = std::max(sup2, d2);
        }
        acc += a.weights[j] * sup2;
    }
    return std::sqrt(acc);
}

}  // namespace

MeanFieldSolution zeta_map(const MeanFieldSolution& eta, const TiltedKernel& rho,
                           const DataAtomSet& pi, const InitialWeightAtomSet& nu, double dt,
                           const Activation& act) {
    if (eta.dim != nu.dim) throw std::invalid_argument("zeta_map: dimension mismatch");
    if (rho.atom_count != pi.size()) throw std::invalid_argument("zeta_map: atom count mismatch");
    (void)dt;   // the grid is carried by the cloud
    const auto rows = cell_rows(rho, eta.grid);
    MeanFieldSolution out = eta;
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const auto atom = nu.atom(j);
        std::copy(atom.begin(), atom.end(), out.at_mut(j, 0).begin());
    }
    integrate_segment(eta, rows, pi, act, 0, eta.grid_size() - 1, out);
    return out;
}

double wasserstein_D(const MeanFieldSolution& eta1, const MeanFieldSolution& eta2, double t0) {
    if (eta1.atoms() != eta2.atoms() || eta1.grid_size() != eta2.grid_size())
        throw std::invalid_argument("wasserstein: clouds do not share atoms");
    std::size_t k_max = 0;
    while (k_max + 1 < eta1.grid_size() && eta1.grid[k_max + 1] <= t0 + 1e-15) ++k_max;
    return segment_gap(eta1, eta2, 0, k_max);
}

double trajectory_bound(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                        const Activation& act, double horizon) {
    const double cs = act.c_sigma;
    const double T = horizon;
    // Gronwall on the cloud's mean |c|: m' <= C_sigma (C_pi + C_sigma m).
    const double mean_c = std::exp(cs * cs * T) * (nu.c_nu + pi.c_pi);
    const double g_bar = pi.c_pi + cs * mean_c;
    const double c_bar = nu.c_nu + T * cs * g_bar;           // per-trajectory |c|
    const double a_sup = g_bar * cs * (1.0 + c_bar) * pi.c_pi;
    return nu.c_nu + T * a_sup;
}

double contraction_constant(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                            const Activation& act, double horizon) {
    const double c_traj = trajectory_bound(nu, pi, act, horizon);
    const double cs2 = act.c_sigma * act.c_sigma;
    const double cp = pi.c_pi;
    const double c1 = 2.0 * cs2 * c_traj * act.l_sigma * cp * cp;
    const double c2 = 2.0 * c_traj * c_traj * cp * cp * cp * cs2 * act.l_sigma;
    return c1 + c2;
}

std::pair<MeanFieldSolution, PicardReport> picard_solve(const TiltedKernel& rho,
                                                        const DataAtomSet& pi,
                                                        const InitialWeightAtomSet& nu,
                                                        double dt, const Activation& act,
                                                        PicardOptions opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("picard: tol must be > 0");
    if (relative_entropy_R(rho, pi) == kInfiniteEntropy)
        throw std::invalid_argument("picard: kernel has infinite relative entropy");

    PicardReport rep;
    rep.c_contr = contraction_constant(nu, pi, act, rho.horizon);

    MeanFieldSolution cur =
        opts.initial ? *opts.initial : MeanFieldSolution::constant_from(nu, rho.horizon, dt);
    cur.c_traj = trajectory_bound(nu, pi, act, rho.horizon);
    const auto rows = cell_rows(rho, cur.grid);
    const std::size_t cells = cur.grid_size() - 1;

    int stalled = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        MeanFieldSolution next = cur;
        for (std::size_t j = 0; j < nu.size(); ++j) {
            const auto atom = nu.atom(j);
            std::copy(atom.begin(), atom.end(), next.at_mut(j, 0).begin());
        }
        integrate_segment(cur, rows, pi, act, 0, cells, next);
        if (opts.damping > 0.0) {
            const double l = opts.damping;
            for (std::size_t i = 0; i < next.values.size(); ++i)
                next.values[i] = (1.0 - l) * next.values[i] + l * cur.values[i];
        }
        const double gap = segment_gap(cur, next, 0, cells);
        rep.gaps.push_back(gap);
        rep.iterations = it + 1;
        if (rep.gaps.size() >= 2) {
            const double prev = rep.gaps[rep.gaps.size() - 2];
            rep.contraction_ratios.push_back(prev > 0.0 ? gap / prev : 0.0);
            stalled = (gap >= prev) ? stalled + 1 : 0;
        }
        cur = std::move(next);
        if (gap < opts.tol) {
            rep.converged = true;
            rep.status = PicardStatus::converged;
            return {std::move(cur), rep};
        }
        if (stalled >= 3) break;   // whole-horizon iteration is not contracting
    }

    // Sequential sub-interval fallback with the provably contracting window
    // T0 = min(T, 1/(2 C_contr)), floored at one Euler cell.
    rep.used_fallback = true;
    const double t0_window = std::min(rho.horizon, 1.0 / (2.0 * rep.c_contr));
    const std::size_t cells_per_window =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(t0_window / cur.dt)));

    MeanFieldSolution sol = MeanFieldSolution::constant_from(nu, rho.horizon, dt);
    sol.c_traj = cur.c_traj;
    std::size_t k0 = 0;
    bool all_ok = true;
    while (k0 < cells) {
        const std::size_t k1 = std::min(cells, k0 + cells_per_window);
        // constant extension of the window's start column as first iterate
        for (std::size_t j = 0; j < sol.atoms(); ++j) {
            const auto start = sol.at(j, k0);
            std::vector<double> s(start.begin(), start.end());
            for (std::size_t k = k0 + 1; k <= k1; ++k)
                std::copy(s.begin(), s.end(), sol.at_mut(j, k).begin());
        }
        bool window_ok = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            MeanFieldSolution next = sol;
            integrate_segment(sol, rows, pi, act, k0, k1, next);
            const double gap = segment_gap(sol, next, k0, k1);
            ++rep.iterations;
            sol = std::move(next);
            if (gap < opts.tol) {
                window_ok = true;
                break;
            }
        }
        if (!window_ok) {
            all_ok = false;
            break;
        }
        k0 = k1;
    }
    rep.converged = all_ok;
    rep.status = all_ok ? PicardStatus::converged_after_fallback : PicardStatus::failed;
    return {std::move(sol), rep};
}

std::pair<MeanFieldSolution, PicardReport> lln_reference(const InitialWeightAtomSet& nu,
                                                         const DataAtomSet& pi, double horizon,
                                                         double dt, const Activation& act,
                                                         PicardOptions opts) {
    // definitionally the tilted solve with the zero-cost kernel
    return picard_solve(TiltedKernel::constant(pi, horizon), pi, nu, dt, act, std::move(opts));
}

double evt_residual(const MeanFieldSolution& eta, const TiltedKernel& rho, const DataAtomSet& pi,
                    const MonomialSpec& f, const Activation& act) {
    if (f.i < 0 || f.i >= eta.dim || (f.second_order() && f.j >= eta.dim))
        throw std::invalid_argument("evt_residual: monomial index out of range");
    const std::size_t d = static_cast<std::size_t>(eta.dim);
    const auto rows = cell_rows(rho, eta.grid);
    const std::size_t cells = eta.grid_size() - 1;

    auto f_val = [&](std::span<const double> th) {
        return f.second_order() ? th[f.i] * th[f.j] : th[f.i];
    };
    // grad f . b for monomials
    auto f_dot = [&](std::span<const double> th, std::span<const double> b) {
        if (!f.second_order()) return b[f.i];
        return th[f.j] * b[f.i] + th[f.i] * b[f.j];
    };

    std::vector<double> g, tmp(d), b_lo(d), b_hi(d);
    std::vector<double> running(eta.atoms(), 0.0);   // trapezoid integral per atom
    std::vector<double> g_next;
    double worst = 0.0;
    residuals_at(eta, 0, pi, act, g);
    for (std::size_t k = 0; k < cells; ++k) {
        residuals_at(eta, k + 1, pi, act, g_next);
        const std::span<const double> row{rows.data() + k * pi.size(), pi.size()};
        const double h = eta.grid[k + 1] - eta.grid[k];
        double level = 0.0;
        for (std::size_t j = 0; j < eta.atoms(); ++j) {
            const auto lo = eta.at(j, k);
            const auto hi = eta.at(j, k + 1);
            drift_at(row, pi, g, lo, act, tmp, b_lo);
            drift_at(row, pi, g_next, hi, act, tmp, b_hi);
            running[j] += 0.5 * h * (f_dot(lo, b_lo) + f_dot(hi, b_hi));
            const double res = f_val(hi) - f_val(eta.at(j, 0)) - running[j];
            level += eta.weights[j] * std::abs(res);
        }
        worst = std::max(worst, level);
        std::swap(g, g_next);
    }
    return worst;
}

}  // namespace mfldp

#pragma once

#include <optional>
#include <vector>

#include "mfldp/activation.hpp"
#include "mfldp/atoms.hpp"
#include "mfldp/tilt.hpp"
#include "mfldp/trajectory.hpp"

namespace mfldp {

// Law of the tilted McKean-Vlasov evolution, represented as a finite
// weighted cloud of deterministic trajectories, one per initial atom of nu.
// Given the driving kernel, each initial point flows deterministically, so
// for finitely supported nu the cloud is the law itself; there is no Monte
// Carlo error inside the solver.
struct MeanFieldSolution {
    int dim = 0;
    double dt = 0.0;
    std::vector<double> grid;        // uniform, grid.back() = T
    std::vector<double> values;      // atom-major: atom j, grid k, component c
    std::vector<double> weights;     // nu's probs
    double c_traj = 0.0;             // explicit trajectory bound (sanity ceiling)

    std::size_t atoms() const { return weights.size(); }
    std::size_t grid_size() const { return grid.size(); }
    std::span<const double> at(std::size_t atom, std::size_t k) const {
        const std::size_t d = static_cast<std::size_t>(dim);
        return {values.data() + (atom * grid.size() + k) * d, d};
    }
    std::span<double> at_mut(std::size_t atom, std::size_t k) {
        const std::size_t d = static_cast<std::size_t>(dim);
        return {values.data() + (atom * grid.size() + k) * d, d};
    }

    // Constant-in-time cloud sitting at the nu atoms.
    static MeanFieldSolution constant_from(const InitialWeightAtomSet& nu, double horizon,
                                           double dt);

    // View as a piecewise-linear TrajectoryMeasure (shared CSV format and
    // functional evaluation).
    TrajectoryMeasure to_trajectory_measure() const;
};

enum class PicardStatus { converged, converged_after_fallback, failed };

struct PicardReport {
    int iterations = 0;
    std::vector<double> gaps;                // D_T(eta_k, eta_{k+1})
    std::vector<double> contraction_ratios;  // gaps[k+1] / gaps[k]
    double c_contr = 0.0;
    bool converged = false;
    PicardStatus status = PicardStatus::failed;
    bool used_fallback = false;
};

struct PicardOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 0.0;            // eta_{k+1} <- (1-l) zeta(eta_k) + l eta_k, atom-wise
    std::optional<MeanFieldSolution> initial;  // default: constant cloud at nu
};

// One application of the fixed-point map: for each initial atom, explicit
// Euler integration of d theta = int A(x, theta; eta_t) rho_t(dx) dt where
// eta is the frozen input cloud and the data integral is the exact atom sum
// with rho's row averaged over each Euler cell.
MeanFieldSolution zeta_map(const MeanFieldSolution& eta, const TiltedKernel& rho,
                           const DataAtomSet& pi, const InitialWeightAtomSet& nu, double dt,
                           const Activation& act);

// Picard iteration of zeta_map from the constant cloud. If the whole-horizon
// iteration stalls (gap ratio >= 1 for 3 consecutive iterations), falls back
// to sequential sub-interval solving with window T0 = min(T, 1/(2 C_contr)),
// floored at one Euler cell since the provable window can drop below grid
// resolution. Non-convergence after the fallback is an explicit failure
// status, never silent.
std::pair<MeanFieldSolution, PicardReport> picard_solve(const TiltedKernel& rho,
                                                        const DataAtomSet& pi,
                                                        const InitialWeightAtomSet& nu,
                                                        double dt, const Activation& act,
                                                        PicardOptions opts = {});

// Synchronous-coupling evaluation of the Wasserstein metric:
//   ( sum_j w_j sup_{t<=T0} ||eta1_j(t) - eta2_j(t)||^2 )^{1/2}.
// Exact for clouds that are deterministic flows of the shared initial atoms
// (all zeta_map outputs), an upper bound in general.
double wasserstein_D(const MeanFieldSolution& eta1, const MeanFieldSolution& eta2, double t0);

// Explicit bound on weak-solution trajectories,
//   C_traj = C_nu + T * sup ||A||,
// with the sup bounded through C_pi, C_sigma and the Gronwall chain for the
// mean |c|. Conservative by orders of magnitude; used only as a ceiling.
double trajectory_bound(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                        const Activation& act, double horizon);

// C_contr = C1 + C2 with C1 = 2 C_sigma^2 C_traj L_sigma C_pi^2 and
// C2 = 2 C_traj^2 C_pi^3 C_sigma^2 L_sigma.
double contraction_constant(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                            const Activation& act, double horizon);

// First- or second-order monomial x -> x_i or x -> x_i x_j.
struct MonomialSpec {
    int i = 0;
    int j = -1;   // -1: first order

    bool second_order() const { return j >= 0; }
};

// Residual of the evolution identity f(theta_t) - f(theta_0) =
// int int A . grad f rho_s(dx) ds along the cloud, with the time integral
// evaluated by the trapezoid rule so the Euler truncation error is visible
// (the left-endpoint sum is the integrator itself and would vanish for
// first-order f). Returns max over grid times of the weight-averaged |residual|.
double evt_residual(const MeanFieldSolution& eta, const TiltedKernel& rho, const DataAtomSet& pi,
                    const MonomialSpec& f, const Activation& act);

// McKean-Vlasov solution under the untilted data distribution (rho = pi as
// constant kernel, R = 0); same code path as picard_solve.
std::pair<MeanFieldSolution, PicardReport> lln_reference(const InitialWeightAtomSet& nu,
                                                         const DataAtomSet& pi, double horizon,
                                                         double dt, const Activation& act,
                                                         PicardOptions opts = {});

}  // namespace mfldp

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfldp/activation.hpp"
#include "mfldp/atoms.hpp"
#include "mfldp/meanfield.hpp"

namespace mfldp {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Config-driven invariant suite behind the `check` experiment. Each probe is
// self-contained and reports the measured quantity next to its bound.

// gradient_A against -n * central finite differences of the one-sample
// quadratic loss in one particle's coordinates.
CheckResult check_gradient_oracle(const Activation& act, int instances, std::uint64_t seed,
                                  double fd_step = 1e-6, double rel_tol = 1e-5);

// sup_n R(rho^n) <= R(rho) over random block kernels.
CheckResult check_entropy_inequality_random(const DataAtomSet& pi, int kernels,
                                            const std::vector<int>& n_values,
                                            std::uint64_t seed);

// pushforward of the empirical initial measure under the coupled stream
// reproduces the particle system pathwise (zero deviation).
CheckResult check_representation_identity(const SimConfig& cfg, const DataAtomSet& pi,
                                          const InitialWeightAtomSet& nu, const Activation& act,
                                          std::uint64_t seed);

// Picard gap ratios on [0, T0], T0 = 1/(2 C_contr), stay below T0 C + 0.1.
CheckResult check_contraction(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                              const Activation& act, double horizon);

// evt_residual halves (ratio within [1.5, 3]) when dt halves, for all first-
// and second-order monomials on the converged untilted solution.
CheckResult check_euler_order(const InitialWeightAtomSet& nu, const DataAtomSet& pi,
                              const Activation& act, double horizon, double dt);

// Growth bound on a simulated run.
CheckResult check_growth_bound(const SimConfig& cfg, const DataAtomSet& pi,
                               const InitialWeightAtomSet& nu, const Activation& act,
                               std::uint64_t seed);

}  // namespace mfldp

#pragma once

#include <span>

#include "mfldp/activation.hpp"
#include "mfldp/atoms.hpp"

namespace mfldp {

// Network readout F(z, mu) = sum_j w_j c_j sigma(z . w_vec_j).
// Summation is sequential in atom order by contract, so coupled
// computations can be compared for exact equality.
double readout_F(std::span<const double> z, const ParamMeasure& mu, const Activation& act);

// Loss residual g((z, y), mu) = y - F(z, mu).
double loss_residual_g(std::span<const double> z, double y, const ParamMeasure& mu,
                       const Activation& act);

// Per-particle gradient
//   A((z,y), (c,w); mu) = (g sigma(z.w), g c sigma'(z.w) z),
// written into out (size d). g is the residual of the frozen measure mu.
void gradient_A(std::span<const double> z, double y, std::span<const double> theta,
                const ParamMeasure& mu, const Activation& act, std::span<double> out);

// Same with the residual precomputed; used by the step loops where g is
// shared by all particles.
void gradient_A_given_g(std::span<const double> z, double g, std::span<const double> theta,
                        const Activation& act, std::span<double> out);

}  // namespace mfldp

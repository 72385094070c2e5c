#pragma once

#include <stdexcept>
#include <string>

namespace mfldp {

enum class ActivationKind { tanh, logistic };

// Bounded C^1 activation with shared Lipschitz constant for sigma and
// sigma'. Only bounded activations are admissible; ReLU and friends are
// rejected at configuration time.
struct Activation {
    ActivationKind kind = ActivationKind::tanh;
    double c_sigma = 1.0;    // uniform bound for |sigma| and |sigma'|, >= 1
    double l_sigma = 1.0000001;  // Lipschitz constant for sigma and sigma', > 1

    double value(double u) const;
    double deriv(double u) const;
    double eval(double u, bool derivative) const { return derivative ? deriv(u) : value(u); }

    std::string name() const { return kind == ActivationKind::tanh ? "tanh" : "logistic"; }
};

// Pinned conservative constants per activation; both tanh and the logistic
// have |sigma| <= 1, |sigma'| <= 1 and Lipschitz constants <= 1, so
// C_sigma = 1 and L_sigma slightly above 1 satisfy the standing conditions.
Activation make_activation(ActivationKind kind);

// Throws std::invalid_argument naming the violated condition for unknown or
// unbounded activations ("relu" in particular).
Activation make_activation(const std::string& name);

}  // namespace mfldp

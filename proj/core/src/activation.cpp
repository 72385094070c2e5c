#include "mfldp/activation.hpp"

#include <cmath>

namespace mfldp {

double Activation::value(double u) const {
    switch (kind) {
        case ActivationKind::tanh:
            return std::tanh(u);
        case ActivationKind::logistic:
            return 1.0 / (1.0 + std::exp(-u));
    }
    throw std::logic_error("unreachable activation kind");
}

double Activation::deriv(double u) const {
    switch (kind) {
        case ActivationKind::tanh: {
            const double t = std::tanh(u);
            return 1.0 - t * t;
        }
        case ActivationKind::logistic: {
            const double s = 1.0 / (1.0 + std::exp(-u));
            return s * (1.0 - s);
        }
    }
    throw std::logic_error("unreachable activation kind");
}

Activation make_activation(ActivationKind kind) {
    Activation act;
    act.kind = kind;
    act.c_sigma = 1.0;
    act.l_sigma = 1.0000001;
    return act;
}

Activation make_activation(const std::string& name) {
    if (name == "tanh") return make_activation(ActivationKind::tanh);
    if (name == "logistic") return make_activation(ActivationKind::logistic);
    if (name == "relu") {
        throw std::invalid_argument(
            "activation 'relu' violates condition (CONT): the activation must be bounded");
    }
    throw std::invalid_argument("unknown activation '" + name + "' (supported: tanh, logistic)");
}

}  // namespace mfldp

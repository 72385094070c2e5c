#include "mfldp/model.hpp"

#include <stdexcept>

namespace mfldp {

namespace {

void require_dim(std::size_t z_len, const ParamMeasure& mu) {
    if (static_cast<int>(z_len) + 1 != mu.dim)
        throw std::invalid_argument("readout: input dimension does not match measure dimension");
    if (mu.size() == 0) throw std::invalid_argument("readout: empty measure");
}

}  // namespace

double readout_F(std::span<const double> z, const ParamMeasure& mu, const Activation& act) {
    require_dim(z.size(), mu);
    double acc = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const auto theta = mu.point(j);
        const double pre = dot(z, theta.subspan(1));
        acc += mu.weights[j] * theta[0] * act.value(pre);
    }
    return acc;
}

double loss_residual_g(std::span<const double> z, double y, const ParamMeasure& mu,
                       const Activation& act) {
    return y - readout_F(z, mu, act);
}

void gradient_A_given_g(std::span<const double> z, double g, std::span<const double> theta,
                        const Activation& act, std::span<double> out) {
    if (out.size() != theta.size() || theta.size() != z.size() + 1)
        throw std::invalid_argument("gradient: dimension mismatch");
    const double pre = dot(z, theta.subspan(1));
    out[0] = g * act.value(pre);
    const double scale = g * theta[0] * act.deriv(pre);
    for (std::size_t i = 0; i < z.size(); ++i) out[i + 1] = scale * z[i];
}

void gradient_A(std::span<const double> z, double y, std::span<const double> theta,
                const ParamMeasure& mu, const Activation& act, std::span<double> out) {
    const double g = loss_residual_g(z, y, mu, act);
    gradient_A_given_g(z, g, theta, act, out);
}

}  // namespace mfldp

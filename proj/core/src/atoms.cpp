#include "mfldp/atoms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfldp {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

void check_probs(std::span<const double> probs, const char* what) {
    if (probs.empty()) throw std::invalid_argument(std::string(what) + ": no atoms");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
        throw std::invalid_argument(std::string(what) + ": probabilities sum to " +
                                    std::to_string(sum) + ", expected 1 within 1e-12");
    }
}

}  // namespace

void DataAtomSet::finalize() {
    if (dim_in < 1) throw std::invalid_argument("data: dim_in must be >= 1");
    if (y.size() * static_cast<std::size_t>(dim_in) != z.size())
        throw std::invalid_argument("data: z/y atom count mismatch");
    if (probs.size() != y.size()) throw std::invalid_argument("data: probs/atom count mismatch");
    check_probs(probs, "data");
    c_pi = 1.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto zi = z_at(i);
        const double aug = std::sqrt(1.0 + dot(zi, zi));   // ||(1, z)||
        c_pi = std::max({c_pi, aug, std::abs(y[i])});
    }
}

void InitialWeightAtomSet::finalize() {
    if (dim < 2) throw std::invalid_argument("weights: dim must be >= 2");
    if (probs.empty() || points.size() != probs.size() * static_cast<std::size_t>(dim))
        throw std::invalid_argument("weights: points/probs shape mismatch");
    check_probs(probs, "weights");
    c_nu = 1.0;   // (WCOMP) asks for a radius >= 1
    for (std::size_t i = 0; i < size(); ++i) c_nu = std::max(c_nu, norm2(atom(i)));
}

void ParamMeasure::validate() const {
    if (dim < 2) throw std::invalid_argument("measure: dim must be >= 2");
    if (points.size() != weights.size() * static_cast<std::size_t>(dim))
        throw std::invalid_argument("measure: points/weights shape mismatch");
    check_probs(weights, "measure");
}

ParamMeasure ParamMeasure::from_atoms(const InitialWeightAtomSet& nu) {
    ParamMeasure mu;
    mu.dim = nu.dim;
    mu.points = nu.points;
    mu.weights = nu.probs;
    return mu;
}

long SimConfig::n_prime() const {
    return static_cast<long>(std::floor(static_cast<double>(n) * horizon + 1e-9));
}

void SimConfig::validate() const {
    if (n < 1) throw std::invalid_argument("sim.n must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("sim.T must be > 0");
    if (dim_in < 1) throw std::invalid_argument("sim.d_in must be >= 1");
}

}  // namespace mfldp

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfldp {

inline constexpr double kProbTol = 1e-12;

// Finite data distribution over atoms x = (z, y), z in R^{d'}, y real.
// Finite support makes the moment condition automatic, keeps every relative
// entropy an exact finite sum, and puts us in the compact-support regime
// where the mean-field equation has a unique solution.
struct DataAtomSet {
    int dim_in = 0;                    // d'
    std::vector<double> z;             // row-major, atom_count x dim_in
    std::vector<double> y;
    std::vector<double> probs;
    double c_pi = 1.0;                 // max over atoms of max(||(1,z)||, |y|, 1)

    std::size_t size() const { return y.size(); }
    std::span<const double> z_at(std::size_t i) const {
        return {z.data() + i * static_cast<std::size_t>(dim_in), static_cast<std::size_t>(dim_in)};
    }

    // Validates normalization and nonnegativity, computes c_pi.
    void finalize();
};

// Finite initial weight distribution over atoms theta = (c, w) in R^d.
struct InitialWeightAtomSet {
    int dim = 0;                       // d = d' + 1
    std::vector<double> points;        // row-major, atom_count x dim, theta[0] = c
    std::vector<double> probs;
    double c_nu = 1.0;                 // max(1, max ||theta||), the compact-support radius

    std::size_t size() const { return probs.size(); }
    std::span<const double> atom(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }

    void finalize();
};

// Weighted atom cloud over parameter space. Weights are frozen at
// construction; SGD pushforwards move points only.
struct ParamMeasure {
    int dim = 0;
    std::vector<double> points;        // row-major, count x dim
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<double> point_mut(std::size_t i) {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }

    // Checks weight normalization within kProbTol; throws on violation.
    void validate() const;

    static ParamMeasure from_atoms(const InitialWeightAtomSet& nu);
};

// Particle count doubles as inverse learning rate; there are
// n' = floor(n T) SGD steps on the grid t_k = k/n.
struct SimConfig {
    int n = 1;
    double horizon = 1.0;              // T
    int dim_in = 1;                    // d'
    std::uint64_t seed = 0;

    int dim() const { return dim_in + 1; }
    // Recomputed on demand so it can never go stale; the epsilon guards
    // against n*T landing a hair below an integer in binary.
    long n_prime() const;
    double learning_rate() const { return 1.0 / static_cast<double>(n); }

    void validate() const;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace mfldp

#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mfldp/atoms.hpp"

namespace mfldp {

inline constexpr double kInfiniteEntropy = std::numeric_limits<double>::infinity();

// Tilted data-trajectory measure rho(dt, dx) = dt (x) rho_t(dx) with rho_t
// piecewise constant on time blocks. The block class is exactly what the
// lower-bound construction works with, is dense enough for the optimizers,
// and keeps all time integrals exact sums.
struct TiltedKernel {
    double horizon = 1.0;               // T
    std::vector<double> block_edges;    // 0 = s_0 < ... < s_B = T
    std::vector<double> probs;          // row-major, B x atom_count
    std::size_t atom_count = 0;

    std::size_t blocks() const { return block_edges.empty() ? 0 : block_edges.size() - 1; }
    std::span<const double> row(std::size_t b) const {
        return {probs.data() + b * atom_count, atom_count};
    }
    std::span<double> row_mut(std::size_t b) {
        return {probs.data() + b * atom_count, atom_count};
    }

    // Constant-in-time kernel equal to the base distribution; R = 0.
    static TiltedKernel constant(const DataAtomSet& pi, double horizon);
    // Single uniform block structure with B blocks, all rows = pi.
    static TiltedKernel constant_blocks(const DataAtomSet& pi, double horizon, std::size_t b);

    // Row of rho averaged over [t0, t1] (exact block-overlap computation).
    void average_row(double t0, double t1, std::span<double> out) const;

    void validate() const;

    std::string to_json() const;
    static TiltedKernel from_json(const std::string& text);
};

// Per-step kernels pi_{k,n}, k = 1..n' = floor(nT).
struct StepKernelSequence {
    int n = 1;
    std::size_t atom_count = 0;
    std::vector<double> probs;          // row-major, n' x atom_count

    std::size_t steps() const { return atom_count == 0 ? 0 : probs.size() / atom_count; }
    std::span<const double> kernel(std::size_t k) const {
        return {probs.data() + k * atom_count, atom_count};
    }

    static StepKernelSequence constant(const DataAtomSet& pi, const SimConfig& cfg);
};

// Relative entropy of two probability vectors over the same atoms, with
// 0 log 0 = 0 and +inf when absolute continuity fails.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// R(rho) = H(rho | dt (x) pi) = sum_b (s_{b+1} - s_b) H(rho_b | pi).
double relative_entropy_R(const TiltedKernel& rho, const DataAtomSet& pi);

// kernel_k = n * integral of rho_t over [(k-1)/n, k/n], exact via block
// overlap lengths. Each output row is a probability vector.
StepKernelSequence discretize_kernel(const TiltedKernel& rho, int n);

// Assembles the steps back into a kernel with n' blocks of width 1/n. The
// tail [n'/n, T] untouched by any step carries the base distribution, which
// adds zero entropy.
TiltedKernel steps_to_kernel(const StepKernelSequence& seq, double horizon,
                             const DataAtomSet& pi);

struct EntropyInequalityResult {
    double lhs = 0.0;   // R of the reassembled discretized kernel
    double rhs = 0.0;   // R(rho)
    bool ok = false;    // lhs <= rhs + 1e-12
};

// Discretizing can only lose entropy (Jensen, rows are time averages).
EntropyInequalityResult check_entropy_inequality(const TiltedKernel& rho, const DataAtomSet& pi,
                                                 int n);

// row_j proportional to p_j exp(beta * potential_j); absolutely continuous
// w.r.t. pi by construction. Computed in log space.
std::vector<double> exponential_tilt(const DataAtomSet& pi, std::span<const double> potential,
                                     double beta);

}  // namespace mfldp

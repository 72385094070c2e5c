#include "mfldp/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mfldp {

TiltedKernel TiltedKernel::constant(const DataAtomSet& pi, double horizon) {
    return constant_blocks(pi, horizon, 1);
}

TiltedKernel TiltedKernel::constant_blocks(const DataAtomSet& pi, double horizon, std::size_t b) {
    if (b == 0) throw std::invalid_argument("kernel: need at least one block");
    TiltedKernel k;
    k.horizon = horizon;
    k.atom_count = pi.size();
    k.block_edges.resize(b + 1);
    for (std::size_t i = 0; i <= b; ++i)
        k.block_edges[i] = horizon * static_cast<double>(i) / static_cast<double>(b);
    k.block_edges.back() = horizon;
    k.probs.resize(b * pi.size());
    for (std::size_t i = 0; i < b; ++i)
        std::copy(pi.probs.begin(), pi.probs.end(), k.probs.begin() + i * pi.size());
    return k;
}

void TiltedKernel::average_row(double t0, double t1, std::span<double> out) const {
    if (out.size() != atom_count) throw std::invalid_argument("kernel: output row size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    const double len = t1 - t0;
    if (!(len > 0.0)) throw std::invalid_argument("kernel: empty averaging window");
    for (std::size_t b = 0; b < blocks(); ++b) {
        const double lo = std::max(t0, block_edges[b]);
        const double hi = std::min(t1, block_edges[b + 1]);
        if (hi <= lo) continue;
        const double w = (hi - lo) / len;
        const auto r = row(b);
        for (std::size_t j = 0; j < atom_count; ++j) out[j] += w * r[j];
    }
}

void TiltedKernel::validate() const {
    if (block_edges.size() < 2) throw std::invalid_argument("kernel: need block edges");
    if (std::abs(block_edges.front()) > 1e-15 || std::abs(block_edges.back() - horizon) > 1e-12)
        throw std::invalid_argument("kernel: block edges must span [0, T]");
    for (std::size_t i = 0; i + 1 < block_edges.size(); ++i)
        if (!(block_edges[i] < block_edges[i + 1]))
            throw std::invalid_argument("kernel: block edges must be strictly increasing");
    if (probs.size() != blocks() * atom_count)
        throw std::invalid_argument("kernel: probability matrix shape mismatch");
    for (std::size_t b = 0; b < blocks(); ++b) {
        double sum = 0.0;
        for (double p : row(b)) {
            if (!(p >= 0.0)) throw std::invalid_argument("kernel: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbTol)
            throw std::invalid_argument("kernel: block row not normalized");
    }
}

std::string TiltedKernel::to_json() const {
    nlohmann::json j;
    j["horizon"] = horizon;
    j["block_edges"] = block_edges;
    j["atom_count"] = atom_count;
    j["probs"] = probs;   // row-major
    return j.dump(2);
}

TiltedKernel TiltedKernel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    TiltedKernel k;
    k.horizon = j.at("horizon").get<double>();
    k.block_edges = j.at("block_edges").get<std::vector<double>>();
    k.atom_count = j.at("atom_count").get<std::size_t>();
    k.probs = j.at("probs").get<std::vector<double>>();
    k.validate();
    return k;
}

StepKernelSequence StepKernelSequence::constant(const DataAtomSet& pi, const SimConfig& cfg) {
    StepKernelSequence seq;
    seq.n = cfg.n;
    seq.atom_count = pi.size();
    const std::size_t steps = static_cast<std::size_t>(cfg.n_prime());
    seq.probs.resize(steps * pi.size());
    for (std::size_t k = 0; k < steps; ++k)
        std::copy(pi.probs.begin(), pi.probs.end(), seq.probs.begin() + k * pi.size());
    return seq;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] == 0.0) continue;          // 0 log 0 = 0
        if (q[j] == 0.0) return kInfiniteEntropy;
        acc += p[j] * std::log(p[j] / q[j]);
    }
    return acc;
}

double relative_entropy_R(const TiltedKernel& rho, const DataAtomSet& pi) {
    if (rho.atom_count != pi.size()) throw std::invalid_argument("entropy: atom count mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < rho.blocks(); ++b) {
        const double h = kl_divergence(rho.row(b), pi.probs);
        if (h == kInfiniteEntropy) return kInfiniteEntropy;
        acc += (rho.block_edges[b + 1] - rho.block_edges[b]) * h;
    }
    return acc;
}

StepKernelSequence discretize_kernel(const TiltedKernel& rho, int n) {
    if (n < 1) throw std::invalid_argument("discretize: n must be >= 1");
    SimConfig probe;
    probe.n = n;
    probe.horizon = rho.horizon;
    const long steps = probe.n_prime();
    StepKernelSequence seq;
    seq.n = n;
    seq.atom_count = rho.atom_count;
    seq.probs.resize(static_cast<std::size_t>(steps) * rho.atom_count);
    const double n_real = static_cast<double>(n);
    for (long k = 1; k <= steps; ++k) {
        std::span<double> out{seq.probs.data() + static_cast<std::size_t>(k - 1) * rho.atom_count,
                              rho.atom_count};
        rho.average_row(static_cast<double>(k - 1) / n_real, static_cast<double>(k) / n_real, out);
    }
    return seq;
}

TiltedKernel steps_to_kernel(const StepKernelSequence& seq, double horizon,
                             const DataAtomSet& pi) {
    if (seq.steps() == 0) throw std::invalid_argument("steps_to_kernel: empty sequence");
    if (seq.atom_count != pi.size())
        throw std::invalid_argument("steps_to_kernel: atom count mismatch");
    TiltedKernel k;
    k.horizon = horizon;
    k.atom_count = seq.atom_count;
    const double n_real = static_cast<double>(seq.n);
    const std::size_t steps = seq.steps();
    const double cutoff = static_cast<double>(steps) / n_real;
    const bool tail = cutoff < horizon - 1e-12;
    k.block_edges.resize(steps + 1 + (tail ? 1 : 0));
    for (std::size_t i = 0; i <= steps; ++i)
        k.block_edges[i] = static_cast<double>(i) / n_real;
    if (tail) k.block_edges[steps + 1] = horizon;
    else k.block_edges[steps] = horizon;   // pin n'/n = T exactly
    k.probs = seq.probs;
    if (tail) k.probs.insert(k.probs.end(), pi.probs.begin(), pi.probs.end());
    return k;
}

EntropyInequalityResult check_entropy_inequality(const TiltedKernel& rho, const DataAtomSet& pi,
                                                 int n) {
    EntropyInequalityResult res;
    res.rhs = relative_entropy_R(rho, pi);
    const auto seq = discretize_kernel(rho, n);
    res.lhs = relative_entropy_R(steps_to_kernel(seq, rho.horizon, pi), pi);
    res.ok = res.lhs <= res.rhs + 1e-12;
    return res;
}

std::vector<double> exponential_tilt(const DataAtomSet& pi, std::span<const double> potential,
                                     double beta) {
    if (potential.size() != pi.size())
        throw std::invalid_argument("tilt: potential length mismatch");
    std::vector<double> logits(pi.size(), -kInfiniteEntropy);
    double top = -kInfiniteEntropy;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (pi.probs[j] == 0.0) continue;
        if (!std::isfinite(potential[j]))
            throw std::invalid_argument("tilt: potential must be finite");
        logits[j] = std::log(pi.probs[j]) + beta * potential[j];
        top = std::max(top, logits[j]);
    }
    std::vector<double> out(pi.size(), 0.0);
    double z = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (pi.probs[j] == 0.0) continue;
        out[j] = std::exp(logits[j] - top);
        z += out[j];
    }
    for (double& p : out) p /= z;
    return out;
}

}  // namespace mfldp

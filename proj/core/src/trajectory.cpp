#include "mfldp/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfldp {

void TrajectoryMeasure::value_at(std::size_t path, double t, std::span<double> out) const {
    const std::size_t k_last = grid.size() - 1;
    if (t <= grid.front()) {
        const auto v = at(path, 0);
        std::copy(v.begin(), v.end(), out.begin());
        return;
    }
    if (t >= grid.back()) {
        const auto v = at(path, k_last);
        std::copy(v.begin(), v.end(), out.begin());
        return;
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin()) - 1;
    const auto lo = at(path, k);
    if (interpolation == Interpolation::piecewise_constant) {
        std::copy(lo.begin(), lo.end(), out.begin());
        return;
    }
    const auto hi = at(path, k + 1);
    const double lam = (t - grid[k]) / (grid[k + 1] - grid[k]);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = (1.0 - lam) * lo[c] + lam * hi[c];
}

void TrajectoryMeasure::validate() const {
    if (grid.empty()) throw std::invalid_argument("trajectory: empty grid");
    if (values.size() != paths() * grid.size() * static_cast<std::size_t>(dim))
        throw std::invalid_argument("trajectory: value buffer shape mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("trajectory: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        throw std::invalid_argument("trajectory: weights not normalized");
}

TestFunctional TestFunctional::constant_one() {
    TestFunctional f;
    f.kind = Kind::constant_one;
    return f;
}

TestFunctional TestFunctional::tanh_of_c_at(double t, int dim) {
    TestFunctional f;
    f.kind = Kind::tanh_linear;
    f.a = 1.0;
    f.b = 0.0;
    f.v.assign(static_cast<std::size_t>(dim), 0.0);
    f.v[0] = 1.0;
    f.t0 = t;
    return f;
}

std::string TestFunctional::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::constant_one: os << "1"; break;
        case Kind::tanh_linear: os << "tanh(a<v,w_t>+b) at t=" << t0; break;
        case Kind::tanh_window: os << "avg tanh(a<v,w_t>+b) over [" << t0 << "," << t1 << "]"; break;
    }
    return os.str();
}

namespace {

double tanh_probe(const TestFunctional& f, std::span<const double> state) {
    double s = f.b;
    for (std::size_t c = 0; c < f.v.size(); ++c) s += f.a * f.v[c] * state[c];
    return std::tanh(s);
}

}  // namespace

double eval_functional(const TestFunctional& f, const TrajectoryMeasure& traj, std::size_t path) {
    switch (f.kind) {
        case TestFunctional::Kind::constant_one:
            return 1.0;
        case TestFunctional::Kind::tanh_linear: {
            if (static_cast<int>(f.v.size()) != traj.dim)
                throw std::invalid_argument("functional: direction dimension mismatch");
            std::vector<double> state(static_cast<std::size_t>(traj.dim));
            traj.value_at(path, f.t0, state);
            return tanh_probe(f, state);
        }
        case TestFunctional::Kind::tanh_window: {
            if (static_cast<int>(f.v.size()) != traj.dim)
                throw std::invalid_argument("functional: direction dimension mismatch");
            double acc = 0.0;
            std::size_t count = 0;
            for (std::size_t k = 0; k < traj.grid_size(); ++k) {
                const double t = traj.grid[k];
                if (t < f.t0 - 1e-15 || t > f.t1 + 1e-15) continue;
                acc += tanh_probe(f, traj.at(path, k));
                ++count;
            }
            if (count == 0) throw std::invalid_argument("functional: window contains no grid points");
            return acc / static_cast<double>(count);
        }
    }
    throw std::logic_error("unreachable functional kind");
}

double empirical_expectation(const TrajectoryMeasure& traj, const TestFunctional& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < traj.paths(); ++i)
        acc += traj.weights[i] * eval_functional(f, traj, i);
    return acc;
}

}  // namespace mfldp

#pragma once

#include <span>
#include <string>
#include <vector>

#include "mfldp/atoms.hpp"

namespace mfldp {

enum class Interpolation { piecewise_constant, piecewise_linear };

// Weighted collection of time-gridded parameter trajectories. SGD output is
// piecewise constant (cadlag: value on [t_k, t_{k+1}) is the value at t_k);
// mean-field solutions are piecewise linear.
struct TrajectoryMeasure {
    int dim = 0;
    std::vector<double> grid;        // shared times, ascending, grid[0] = 0
    std::vector<double> values;      // path-major: path i, grid k, component c
    std::vector<double> weights;
    Interpolation interpolation = Interpolation::piecewise_constant;
    double observed_sup = 0.0;       // max ||theta|| seen while evolving (exact even if strided)
    long stride = 1;                 // >1 when dense storage exceeded the memory budget

    std::size_t paths() const { return weights.size(); }
    std::size_t grid_size() const { return grid.size(); }

    std::span<const double> at(std::size_t path, std::size_t k) const {
        const std::size_t d = static_cast<std::size_t>(dim);
        return {values.data() + (path * grid.size() + k) * d, d};
    }
    std::span<double> at_mut(std::size_t path, std::size_t k) {
        const std::size_t d = static_cast<std::size_t>(dim);
        return {values.data() + (path * grid.size() + k) * d, d};
    }

    // Interpolated state of one path at time t (clamped to [grid.front(), grid.back()]).
    void value_at(std::size_t path, double t, std::span<double> out) const;

    void validate() const;
};

// Catalog of bounded continuous test functionals of trajectories. All are
// built from tanh(a <v, omega_t> + b), evaluated at one time or averaged
// over the grid points of a window; that is enough to probe the weak
// topology and keeps experiments declarative.
struct TestFunctional {
    enum class Kind { constant_one, tanh_linear, tanh_window };
    Kind kind = Kind::tanh_linear;
    double a = 1.0;
    double b = 0.0;
    std::vector<double> v;           // direction in R^d
    double t0 = 0.0;                 // evaluation time, or window start
    double t1 = 0.0;                 // window end (tanh_window only)

    static TestFunctional constant_one();
    // tanh of the c-component at time t: the workhorse functional.
    static TestFunctional tanh_of_c_at(double t, int dim);

    std::string describe() const;
};

double eval_functional(const TestFunctional& f, const TrajectoryMeasure& traj, std::size_t path);

// theta(f) = sum_i weights_i f(path_i), sequential in path order.
double empirical_expectation(const TrajectoryMeasure& traj, const TestFunctional& f);

}  // namespace mfldp

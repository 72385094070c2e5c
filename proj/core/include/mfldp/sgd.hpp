#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfldp/activation.hpp"
#include "mfldp/atoms.hpp"
#include "mfldp/rng.hpp"
#include "mfldp/trajectory.hpp"

namespace mfldp {

// Realized training data for one run: indices into a DataAtomSet, one per
// SGD step.
struct DataStream {
    enum class Source { iid_pi, step_kernels };
    std::vector<std::size_t> points;
    Source source = Source::iid_pi;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
};

// Explicit constants realizing the growth bound
//   sup_t ||theta_t|| <= C_nu + C_sgd (T^2+1) (1 + Ybar*4 + Zbar*2),
// assembled from the per-step update bound via Cauchy-Schwarz; see
// assemble_c_sgd in sgd.cpp for the documented chain.
struct GrowthBoundReport {
    double y_star_1 = 0.0, y_star_2 = 0.0, y_star_4 = 0.0;  // (1/n) sum |Y_k|^m
    double z_star_1 = 0.0, z_star_2 = 0.0;                  // (1/n) sum ||(1, Z_k)||^m
    double c_bar = 0.0;       // 2 (1+T) C_sigma^3 exp(C_sigma^2 T)
    double c_sgd = 0.0;
    double c_nu = 0.0;        // compact-support radius of the realized initial cloud
    double bound = 0.0;
    double observed_sup = 0.0;

    bool holds() const { return observed_sup <= bound; }
};

// One simultaneous SGD update: every point moves by eps * A(x, theta; state)
// where the measure argument is the pre-update state for all particles.
// Weights are untouched.
ParamMeasure sgd_step(const ParamMeasure& state, std::span<const double> z, double y,
                      double eps, const Activation& act);

// Sub-stream ids of one simulation; coupled experiments (identity-tilted
// importance sampling in particular) must consume randomness through the
// same ids to reproduce a run draw-for-draw.
inline constexpr std::uint64_t kInitSubStream = 1;
inline constexpr std::uint64_t kDataSubStream = 2;

// Seeded draws. Sub-streams are fixed so that coupled experiments can
// reproduce exactly the randomness a simulation consumed.
DataStream draw_data_stream(const SimConfig& cfg, const DataAtomSet& pi, std::uint64_t seed);
ParamMeasure draw_initial_particles(const SimConfig& cfg, const InitialWeightAtomSet& nu,
                                    std::uint64_t seed);

struct StorageBudget {
    // Strided snapshots kick in above this many stored doubles.
    std::size_t max_doubles = std::size_t{1} << 26;
};

// Deterministic pushforward flow: every atom of nu0 evolves through the SGD
// maps driven by the given stream, with the frozen cloud itself as the
// measure argument. No randomness beyond the stream. Single-threaded,
// sequential summation, so coupled runs agree bitwise.
TrajectoryMeasure pushforward_eta_n(const ParamMeasure& nu0, const DataStream& stream,
                                    const SimConfig& cfg, const DataAtomSet& pi,
                                    const Activation& act, StorageBudget budget = {});

// n-particle SGD trajectory measure: n iid initial particles from nu,
// n' iid data points from pi, eps = 1/n, uniform weights. Coupled to
// pushforward_eta_n through draw_initial_particles / draw_data_stream:
// feeding those back reproduces this output exactly.
TrajectoryMeasure simulate_theta_n(const SimConfig& cfg, const DataAtomSet& pi,
                                   const InitialWeightAtomSet& nu, const Activation& act,
                                   std::uint64_t seed, StorageBudget budget = {});

GrowthBoundReport growth_bound_report(const TrajectoryMeasure& traj, const DataStream& stream,
                                      const SimConfig& cfg, const DataAtomSet& pi,
                                      const Activation& act);

// The documented constant chain; exposed for the manifest.
double assemble_c_sgd(double c_sigma, double c_nu, double horizon);

}  // namespace mfldp

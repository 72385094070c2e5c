#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfldp/activation.hpp"
#include "mfldp/atoms.hpp"
#include "mfldp/ldp.hpp"

namespace mfldp {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Experiment { simulate, meanfield, lln, rate_I, rate_J, importance, decay, check };

Experiment experiment_from_name(const std::string& name);
std::string experiment_name(Experiment e);

struct MeanFieldConfig {
    double dt = 1.0 / 128.0;
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 0.0;
};

struct TiltConfig {
    std::size_t blocks = 2;
    bool tail_carries_base = true;   // fixed convention, echoed for visibility
};

struct ExperimentParams {
    long replicas = 1;
    std::vector<int> n_list;
    std::optional<TestFunctional> functional;
    std::optional<EventSpec> event;
    double target = 0.0;             // rate_I / rate_J boundary value
    std::string method = "tilted";   // decay: "naive" or "tilted"
    OptimizerConfig optimizer;
};

struct RunConfig {
    Activation activation;
    DataAtomSet data;
    InitialWeightAtomSet weights;
    SimConfig sim;
    MeanFieldConfig meanfield;
    TiltConfig tilt;
    Experiment experiment = Experiment::check;
    ExperimentParams params;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    bool seed_defaulted = false;
    bool plots = false;
    int workers = 1;
    bool checked = false;
    std::string canonical_json;      // sorted-key dump of the parsed document
};

// Every derived constant used by any assertion, echoed into the manifest.
struct DerivedConstants {
    double c_sigma = 0.0, l_sigma = 0.0;
    double c_nu = 0.0, c_pi = 0.0;
    double c_bar = 0.0;       // 2 (1+T) C_sigma^3 exp(C_sigma^2 T)
    double c_sgd = 0.0;
    double c_traj = 0.0;
    double c_contr = 0.0;
    double t0_window = 0.0;   // min(T, 1/(2 C_contr))
};

DerivedConstants derive_constants(const RunConfig& cfg);

// Parses and validates a JSON config document. Schema violations throw
// std::invalid_argument naming the offending path; semantic violations cite
// the violated condition (an unbounded activation reports "(CONT)").
// A missing seed defaults to 0 and sets seed_defaulted so the caller can warn.
RunConfig parse_config(const std::string& json_text);

RunConfig parse_config_file(const std::string& path);

}  // namespace mfldp

#pragma once

#include <string>

#include "mfldp/config.hpp"

namespace mfldp {

struct RunOutcome {
    int exit_code = 0;
    std::string status = "ok";     // machine-readable failure reason when nonzero
    std::vector<std::string> files_written;
};

// Dispatches the configured experiment, writes manifest.json plus result
// CSVs (and optional SVG plots) under cfg.output_dir. Timestamps live only
// in the manifest; every CSV is a pure function of (config, seed).
RunOutcome run(const RunConfig& cfg);

}  // namespace mfldp

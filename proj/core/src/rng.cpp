#include "mfldp/rng.hpp"

namespace mfldp {

std::vector<double> cumulative_probs(std::span<const double> probs) {
    std::vector<double> cdf(probs.size());
    double run = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        run += probs[i];
        cdf[i] = run;
    }
    // rounding can leave the last entry a hair under 1, which would make
    // inverse-CDF lookups fail for u close to 1
    if (!cdf.empty()) cdf.back() = 1.0;
    return cdf;
}

}  // namespace mfldp

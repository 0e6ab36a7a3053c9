#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edslevy/levy_model.hpp"

namespace edslevy {

struct SimConfig {
    std::size_t paths = 100000;
    std::uint64_t seed = 20240611;
    double dt = 1.0 / 3600.0;
    /// Sample a Brownian-bridge crossing between monitoring points.
    bool bridge = true;
    /// Paths are split into this many independently seeded blocks; results
    /// are reproducible for a fixed partition count whatever the thread count.
    unsigned partitions = 16;
    unsigned threads = 0;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t paths = 0;
};

/// P(X drops to ln b by each horizon), estimated from one set of paths. The
/// path runs on the dt grid; between grid points it is split at the jump
/// arrival times, so every jump is checked against the barrier.
std::vector<McEstimate> simulate_passage(const HyperExpLevyModel& model, double barrier,
                                         const std::vector<double>& horizons, const SimConfig& cfg);
McEstimate simulate_passage(const HyperExpLevyModel& model, double barrier, double horizon,
                            const SimConfig& cfg);

/// First-passage time of each path below ln b, +inf when the path stays
/// above the barrier up to `horizon`.
std::vector<double> simulate_passage_times(const HyperExpLevyModel& model, double barrier, double horizon,
                                           const SimConfig& cfg);

/// X_T samples. A Levy increment needs no grid: drift, one Gaussian draw and
/// the Poisson jump sums are sampled exactly.
std::vector<double> simulate_terminal(const HyperExpLevyModel& model, double horizon, const SimConfig& cfg);

/// Sample mean and its standard error.
McEstimate summarize(const std::vector<double>& values);

} // namespace edslevy

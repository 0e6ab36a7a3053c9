#pragma once

#include <string>
#include <vector>

#include "edslevy/hyperexp.hpp"
#include "edslevy/inversion.hpp"
#include "edslevy/monte_carlo.hpp"

namespace edslevy {

/// P(sup_{s<=t} (mu s + sigma W_s) >= x) for x > 0 (reflection principle).
double brownian_passage_probability(double mu, double sigma2, double level, double t);

struct ValidationConfig {
    CgmyParams params{0.5, 2.0, 10.0, 0.5};
    MixtureLayout layout;
    DiffusionConfig diffusion;
    double rate = 0.05;
    double dividend_yield = 0.0;
    double barrier = 0.3;
    std::vector<double> horizons{1.0, 5.0};
    EulerInversionParams euler;
    SimConfig sim;
    std::size_t terminal_paths = 200000;
};

struct ValidationCheck {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Cross-checks of the analytic stages against closed forms and the Monte
/// Carlo simulator. Never throws on a failed check; stage errors propagate.
std::vector<ValidationCheck> run_validation(const ValidationConfig& cfg);

} // namespace edslevy

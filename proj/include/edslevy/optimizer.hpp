#pragma once

#include <functional>
#include <span>
#include <vector>

namespace edslevy {

struct SimplexOptions {
    int max_evaluations = 50000;
    /// Convergence when the simplex spread in function value falls below
    /// f_tol * (|f_best| + f_tol) and in coordinates below x_tol.
    double f_tol = 1e-15;
    double x_tol = 1e-10;
    double initial_step = 0.1;
    /// A converged simplex is rebuilt around the best vertex up to this many
    /// times; the run stops early once a restart brings no improvement.
    int max_restarts = 12;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead with dimension-adaptive coefficients. Bounds are the caller's
/// business: reparametrise (log, log-increments) or return +inf outside the
/// feasible set. Never throws on non-convergence; check `converged`.
SimplexResult minimize_simplex(const Objective& f, std::vector<double> start,
                               const SimplexOptions& options = {});

} // namespace edslevy

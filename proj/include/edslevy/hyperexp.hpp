#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edslevy/errors.hpp"

namespace edslevy {

/// Risk-neutral CGMY parameters. Jump density C e^{-Mx}/x^{1+Y} for x > 0
/// and C e^{-G|x|}/|x|^{1+Y} for x < 0.
struct CgmyParams {
    double C = 0.0;
    double G = 0.0;
    double M = 0.0;
    double Y = 0.5;

    /// Throws ConfigError unless C >= 0, G > 0, M > 0 and 0 < Y < 1. C = 0
    /// is accepted as the degenerate zero-intensity case. With
    /// `risk_neutral_equity` set, additionally requires M > 1.
    void validate(bool risk_neutral_equity = false) const;
};

/// Points x = min, min + step, ..., up to max (inclusive, within half a step).
struct FitGrid {
    double min = 0.25;
    double max = 5.0;
    double step = 0.025;

    std::vector<double> points() const;
};

/// How the weight of the last node is formed. Without a terminal ratio the
/// last node only sets the spacing of its predecessor (N nodes, N-1 terms);
/// with ratio r every node carries a term and the last spacing is r * u_N.
struct MixtureLayout {
    std::optional<double> terminal_spacing_ratio = 0.6;
};

/// Exponential mixture sum_i w_i e^{-u_i x} approximating x^{-1-Y}, with
/// w_i = u_i^Y (u_{i+1} - u_i) / Gamma(1+Y).
struct ExpMixtureFit {
    double Y = 0.5;
    std::vector<double> nodes;   ///< u_1 < ... < u_N, all optimised
    std::vector<double> rates;   ///< the nodes that carry a weight
    std::vector<double> weights; ///< one per rate, all positive
    MixtureLayout layout;
    std::vector<double> fit_grid;
    double residual_norm = 0.0; ///< sum of squared errors on fit_grid
    int iterations = 0;
    int evaluations = 0;
    std::string id;

    double evaluate(double x) const;
};

/// Thrown when the node optimiser stops without converging; carries the best
/// mixture found so far.
class MixtureFitError : public NumericalError {
public:
    MixtureFitError(const std::string& what, ExpMixtureFit best)
        : NumericalError(what), best_(std::move(best)) {}
    const ExpMixtureFit& best() const { return best_; }

private:
    ExpMixtureFit best_;
};

struct MixtureFitOptions {
    MixtureLayout layout;
    int max_evaluations = 200000;
    double f_tol = 1e-15;
    double x_tol = 1e-11;
};

/// Weights for a node list under a layout. Throws ConfigError if the nodes are
/// not strictly increasing and positive.
ExpMixtureFit make_mixture(double Y, std::vector<double> nodes, const MixtureLayout& layout = {});

/// Sum of squared errors between x^{-1-Y} and the mixture on `grid`.
double mixture_sse(const ExpMixtureFit& mixture, const std::vector<double>& grid);

/// max over grid of |x^{1+Y} * mixture(x) - 1|.
double max_relative_error(const ExpMixtureFit& mixture, const std::vector<double>& grid);

/// Least-squares node fit. The simplex works on u_1 = e^{z_1},
/// u_{i+1} = u_i + e^{z_{i+1}}, so every trial node list is sorted and positive.
ExpMixtureFit fit_exponential_mixture(double Y, const std::vector<double>& initial_nodes,
                                      const FitGrid& grid, const MixtureFitOptions& options = {});

/// Reference Y = 0.5 node list {.1940, .5982, .8434, 1.1399, 1.5308, 2.1211, 3.4055}.
ExpMixtureFit reference_mixture(const MixtureLayout& layout = {});
const std::vector<double>& reference_nodes();
const std::vector<double>& reference_start_nodes();

struct ExpTerm {
    double intensity; ///< a_i: jump density coefficient
    double rate;      ///< alpha_i: exponential decay rate
};

struct TwoSidedDensity {
    std::vector<ExpTerm> positive; ///< (c_i, M + u_i)
    std::vector<ExpTerm> negative; ///< (c_i, G + u_i), in |x|
};

/// c_i = C * w_i, alpha_i = M + u_i, beta_i = G + u_i.
TwoSidedDensity build_two_sided_density(const ExpMixtureFit& fit, const CgmyParams& params);

/// CGMY Levy density at x != 0.
double cgmy_density(const CgmyParams& params, double x);

} // namespace edslevy

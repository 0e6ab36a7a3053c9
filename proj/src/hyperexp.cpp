#include "edslevy/hyperexp.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "edslevy/optimizer.hpp"

namespace edslevy {

void CgmyParams::validate(bool risk_neutral_equity) const
{
    if (!(C >= 0.0) || !std::isfinite(C))
        throw ConfigError(fmt::format("CGMY C must be non-negative, got {}", C));
    if (!(G > 0.0) || !std::isfinite(G))
        throw ConfigError(fmt::format("CGMY G must be positive, got {}", G));
    if (!(M > 0.0) || !std::isfinite(M))
        throw ConfigError(fmt::format("CGMY M must be positive, got {}", M));
    if (!(Y > 0.0 && Y < 1.0))
        throw ConfigError(fmt::format("CGMY Y must lie in (0, 1), got {}", Y));
    if (risk_neutral_equity && !(M > 1.0))
        throw ConfigError(fmt::format("risk-neutral equity pricing needs M > 1, got {}", M));
}

std::vector<double> FitGrid::points() const
{
    if (!(min > 0.0) || !(max >= min) || !(step > 0.0))
        throw ConfigError(fmt::format("invalid fit grid [{}, {}] step {}", min, max, step));
    std::vector<double> x;
    const auto count = static_cast<long>(std::floor((max - min) / step + 0.5)) + 1;
    x.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        x.push_back(min + static_cast<double>(i) * step);
    return x;
}

double ExpMixtureFit::evaluate(double x) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i)
        sum += weights[i] * std::exp(-rates[i] * x);
    return sum;
}

ExpMixtureFit make_mixture(double Y, std::vector<double> nodes, const MixtureLayout& layout)
{
    if (!(Y > 0.0 && Y < 1.0))
        throw ConfigError(fmt::format("mixture exponent Y must lie in (0, 1), got {}", Y));
    const bool terminal = layout.terminal_spacing_ratio.has_value();
    if (nodes.size() < (terminal ? 1u : 2u))
        throw ConfigError("mixture needs at least two nodes (one with a terminal spacing)");
    if (terminal && !(*layout.terminal_spacing_ratio > 0.0))
        throw ConfigError("terminal spacing ratio must be positive");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i] > 0.0) || !std::isfinite(nodes[i]))
            throw ConfigError(fmt::format("mixture node {} is not positive: {}", i + 1, nodes[i]));
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw ConfigError(fmt::format("mixture nodes not strictly increasing at {}", i + 1));
    }

    ExpMixtureFit fit;
    fit.Y = Y;
    fit.layout = layout;
    const double norm = std::tgamma(1.0 + Y);
    const std::size_t terms = terminal ? nodes.size() : nodes.size() - 1;
    for (std::size_t i = 0; i < terms; ++i) {
        const double spacing = i + 1 < nodes.size() ? nodes[i + 1] - nodes[i]
                                                    : *layout.terminal_spacing_ratio * nodes[i];
        fit.rates.push_back(nodes[i]);
        fit.weights.push_back(std::pow(nodes[i], Y) * spacing / norm);
    }
    fit.nodes = std::move(nodes);
    return fit;
}

double mixture_sse(const ExpMixtureFit& mixture, const std::vector<double>& grid)
{
    double sse = 0.0;
    for (double x : grid) {
        const double r = std::pow(x, -1.0 - mixture.Y) - mixture.evaluate(x);
        sse += r * r;
    }
    return sse;
}

double max_relative_error(const ExpMixtureFit& mixture, const std::vector<double>& grid)
{
    double worst = 0.0;
    for (double x : grid)
        worst = std::max(worst, std::abs(std::pow(x, 1.0 + mixture.Y) * mixture.evaluate(x) - 1.0));
    return worst;
}

namespace {

std::vector<double> nodes_from_increments(std::span<const double> z)
{
    std::vector<double> u(z.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        acc += std::exp(z[i]);
        u[i] = acc;
    }
    return u;
}

} // namespace

ExpMixtureFit fit_exponential_mixture(double Y, const std::vector<double>& initial_nodes,
                                      const FitGrid& grid, const MixtureFitOptions& options)
{
    // Validates Y, ordering and positivity of the start.
    make_mixture(Y, initial_nodes, options.layout);
    const auto x = grid.points();

    // Precomputed target; the objective runs on the dense grid many thousand times.
    std::vector<double> target(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        target[k] = std::pow(x[k], -1.0 - Y);

    const bool terminal = options.layout.terminal_spacing_ratio.has_value();
    const double norm = std::tgamma(1.0 + Y);
    auto objective = [&](std::span<const double> z) {
        const auto u = nodes_from_increments(z);
        const std::size_t terms = terminal ? u.size() : u.size() - 1;
        std::vector<double> w(terms);
        for (std::size_t i = 0; i < terms; ++i) {
            const double spacing = i + 1 < u.size() ? u[i + 1] - u[i]
                                                    : *options.layout.terminal_spacing_ratio * u[i];
            w[i] = std::pow(u[i], Y) * spacing / norm;
        }
        double sse = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            double approx = 0.0;
            for (std::size_t i = 0; i < terms; ++i)
                approx += w[i] * std::exp(-u[i] * x[k]);
            const double r = target[k] - approx;
            sse += r * r;
        }
        return sse;
    };

    std::vector<double> z(initial_nodes.size());
    z[0] = std::log(initial_nodes[0]);
    for (std::size_t i = 1; i < z.size(); ++i)
        z[i] = std::log(initial_nodes[i] - initial_nodes[i - 1]);

    SimplexOptions simplex;
    simplex.max_evaluations = options.max_evaluations;
    simplex.f_tol = options.f_tol;
    simplex.x_tol = options.x_tol;
    simplex.initial_step = 0.25;
    const auto result = minimize_simplex(objective, z, simplex);

    const auto nodes = nodes_from_increments(result.x);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i] > 0.0) || !std::isfinite(nodes[i]) || (i > 0 && !(nodes[i] > nodes[i - 1])))
            throw NumericalError(fmt::format("node fit produced an invalid node {} = {}", i + 1, nodes[i]));
    }
    ExpMixtureFit fit = make_mixture(Y, nodes, options.layout);
    fit.fit_grid = x;
    fit.residual_norm = mixture_sse(fit, x);
    fit.iterations = result.iterations;
    fit.evaluations = result.evaluations;
    fit.id = fmt::format("fit-y{}-n{}", Y, nodes.size());
    if (!result.converged)
        throw MixtureFitError(fmt::format("node fit did not converge within {} evaluations",
                                          options.max_evaluations),
                              fit);
    return fit;
}

const std::vector<double>& reference_nodes()
{
    static const std::vector<double> nodes{0.1940, 0.5982, 0.8434, 1.1399, 1.5308, 2.1211, 3.4055};
    return nodes;
}

const std::vector<double>& reference_start_nodes()
{
    static const std::vector<double> nodes{0.5, 2.0, 5.0, 10.0, 20.0, 40.0, 100.0};
    return nodes;
}

ExpMixtureFit reference_mixture(const MixtureLayout& layout)
{
    ExpMixtureFit fit = make_mixture(0.5, reference_nodes(), layout);
    fit.fit_grid = FitGrid{}.points();
    fit.residual_norm = mixture_sse(fit, fit.fit_grid);
    fit.id = "reference-y0.5";
    return fit;
}

TwoSidedDensity build_two_sided_density(const ExpMixtureFit& fit, const CgmyParams& params)
{
    if (std::abs(fit.Y - params.Y) > 1e-12)
        throw ConfigError(fmt::format("mixture fitted for Y = {} used with Y = {}", fit.Y, params.Y));
    TwoSidedDensity density;
    for (std::size_t i = 0; i < fit.rates.size(); ++i) {
        const double c = params.C * fit.weights[i];
        density.positive.push_back({c, params.M + fit.rates[i]});
        density.negative.push_back({c, params.G + fit.rates[i]});
    }
    return density;
}

double cgmy_density(const CgmyParams& params, double x)
{
    if (x > 0.0)
        return params.C * std::exp(-params.M * x) / std::pow(x, 1.0 + params.Y);
    if (x < 0.0)
        return params.C * std::exp(params.G * x) / std::pow(-x, 1.0 + params.Y);
    throw ConfigError("CGMY density is singular at 0");
}

} // namespace edslevy

#include "edslevy/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "edslevy/parallel.hpp"
#include "edslevy/wiener_hopf.hpp"

namespace edslevy {

void EulerInversionParams::validate() const
{
    if (!(A > 0.0) || !std::isfinite(A))
        throw ConfigError(fmt::format("Euler inversion A must be positive, got {}", A));
    if (m_euler < 1 || n_terms <= m_euler)
        throw ConfigError(fmt::format("Euler inversion needs n_terms > m_euler >= 1, got n = {}, m = {}",
                                      n_terms, m_euler));
}

EulerRule euler_rule(double t, const EulerInversionParams& params)
{
    params.validate();
    if (!(t > 0.0) || !std::isfinite(t))
        throw ConfigError(fmt::format("inversion time must be positive, got {}", t));
    const int n = params.n_terms;
    const int m = params.m_euler;
    const int count = n + m + 1;

    // Partial sum S_j = (e^{A/2}/t) [Re F(s_0)/2 + sum_{k=1}^{j} (-1)^k Re F(s_k)];
    // estimate = sum_{j=0}^{m} binom(m, j) 2^{-m} S_{n+j}. Term k enters every
    // S_{n+j} with n+j >= k.
    std::vector<double> binom(static_cast<std::size_t>(m + 1));
    binom[0] = std::ldexp(1.0, -m);
    for (int j = 1; j <= m; ++j)
        binom[static_cast<std::size_t>(j)] = binom[static_cast<std::size_t>(j - 1)] * (m - j + 1) / j;
    std::vector<double> tail(static_cast<std::size_t>(m + 2), 0.0); // tail[j] = sum_{i>=j} binom[i]
    for (int j = m; j >= 0; --j)
        tail[static_cast<std::size_t>(j)] = tail[static_cast<std::size_t>(j + 1)] + binom[static_cast<std::size_t>(j)];

    const double front = std::exp(0.5 * params.A) / t;
    EulerRule rule;
    rule.abscissae.reserve(static_cast<std::size_t>(count));
    rule.weights.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        rule.abscissae.emplace_back(params.A / (2.0 * t), k * std::numbers::pi / t);
        const double share = k <= n ? 1.0 : tail[static_cast<std::size_t>(k - n)];
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        rule.weights.push_back(front * sign * share * (k == 0 ? 0.5 : 1.0));
    }
    return rule;
}

double invert(const LaplaceTransform& transform, double t, const EulerInversionParams& params)
{
    const auto rule = euler_rule(t, params);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.abscissae.size(); ++k) {
        sum += rule.weights[k] * transform(rule.abscissae[k]).real();
        if (!std::isfinite(sum))
            throw NumericalError(fmt::format("Euler partial sum is not finite at t = {} (term {})", t, k));
    }
    return sum;
}

double FirstPassageCurve::survival_on(int day) const
{
    if (day == 0)
        return 1.0;
    if (day < 1 || day > last_day())
        throw ConfigError(fmt::format("day {} outside the passage curve (1..{})", day, last_day()));
    return survival[static_cast<std::size_t>(day - 1)];
}

double FirstPassageCurve::probability_on(int day) const
{
    if (day < 1 || day > last_day())
        throw ConfigError(fmt::format("day {} outside the passage curve (1..{})", day, last_day()));
    return day_probability[static_cast<std::size_t>(day - 1)];
}

FirstPassageCurve passage_curve(const HyperExpLevyModel& model, double barrier, int days,
                                const PassageCurveOptions& options)
{
    if (!(barrier > 0.0 && barrier < 1.0))
        throw ConfigError(fmt::format("barrier must lie in (0, 1), got {}", barrier));
    if (days < 1)
        throw ConfigError(fmt::format("passage curve needs at least one day, got {}", days));
    options.euler.validate();

    const WienerHopfSolver solver(model.reflected());
    const double level = -std::log(barrier);
    const auto count = static_cast<std::size_t>(days);
    const auto terms = static_cast<std::size_t>(options.euler.n_terms + options.euler.m_euler + 1);

    FirstPassageCurve curve;
    curve.barrier = barrier;
    curve.days.resize(count);
    curve.times.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        curve.days[i] = static_cast<int>(i) + 1;
        curve.times[i] = curve.days[i] / 360.0;
    }

    // Work runs along each Euler abscissa index across the days: s_k(t) moves
    // smoothly with t, so the previous day's roots warm-start the next solve.
    std::vector<std::vector<double>> cdf_terms(terms, std::vector<double>(count));
    std::vector<std::vector<double>> pdf_terms(terms, std::vector<double>(count));
    parallel_for(terms, [&](std::size_t k) {
        std::vector<cplx> previous;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = curve.times[i];
            const cplx a(options.euler.A / (2.0 * t), static_cast<double>(k) * std::numbers::pi / t);
            auto all = solver.roots(a, previous);
            const auto tr = WienerHopfSolver::passage(level, solver.factor_from_roots(a, all));
            cdf_terms[k][i] = tr.distribution.real();
            pdf_terms[k][i] = tr.density.real();
            previous = std::move(all);
        }
    }, options.threads);

    std::vector<double> crossed(count), density(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto rule = euler_rule(curve.times[i], options.euler);
        double cdf = 0.0, pdf = 0.0;
        for (std::size_t k = 0; k < terms; ++k) {
            cdf += rule.weights[k] * cdf_terms[k][i];
            pdf += rule.weights[k] * pdf_terms[k][i];
        }
        if (!std::isfinite(cdf) || !std::isfinite(pdf))
            throw NumericalError(fmt::format("passage inversion not finite on day {}", i + 1));
        crossed[i] = cdf;
        density[i] = pdf;
    }

    curve.survival.resize(count);
    curve.density.resize(count);
    curve.day_probability.resize(count);
    const double day_length = options.daycount_365 ? 365.0 : 360.0;
    double previous = 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        double s = std::clamp(1.0 - crossed[i], 0.0, 1.0);
        if (s > previous) {
            if (s - previous > options.repair_tolerance)
                throw NumericalError(fmt::format(
                    "survival increases by {:.3g} on day {} (barrier {}); inversion is unreliable",
                    s - previous, i + 1, barrier));
            s = previous;
            ++curve.survival_repairs;
        }
        curve.survival[i] = s;
        previous = s;

        double f = density[i];
        if (f < 0.0) {
            f = 0.0;
            ++curve.density_clamps;
        }
        curve.density[i] = f;
        curve.day_probability[i] = f / day_length;
    }
    return curve;
}

} // namespace edslevy

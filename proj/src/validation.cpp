#include "edslevy/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "edslevy/calibration.hpp"
#include "edslevy/wiener_hopf.hpp"

namespace edslevy {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

ValidationCheck check(std::string name, double value, double reference, double tolerance)
{
    const bool ok = std::abs(value - reference) <= tolerance;
    return {std::move(name), value, reference, tolerance, ok};
}

} // namespace

double brownian_passage_probability(double mu, double sigma2, double level, double t)
{
    if (!(level > 0.0) || !(sigma2 > 0.0) || !(t > 0.0))
        throw ConfigError("Brownian passage needs level, variance and time positive");
    const double sd = std::sqrt(sigma2 * t);
    const double direct = normal_cdf((mu * t - level) / sd);
    // e^{2 mu x/sigma^2} Phi(.) in log space; the product stays bounded.
    const double tail = 0.5 * std::erfc((level + mu * t) / (sd * std::numbers::sqrt2));
    const double reflected = tail > 0.0 ? std::exp(2.0 * mu * level / sigma2 + std::log(tail)) : 0.0;
    return direct + reflected;
}

std::vector<ValidationCheck> run_validation(const ValidationConfig& cfg)
{
    std::vector<ValidationCheck> out;
    const auto mixture = reference_mixture(cfg.layout);
    const auto model = assemble_model(mixture, cfg.params, cfg.rate, cfg.dividend_yield, cfg.diffusion);

    out.push_back(check("kappa(1) = r - q", model.exponent(1.0).real(), cfg.rate - cfg.dividend_yield, 1e-12));

    {
        const auto f = wh_plus_factor(model.reflected(), cplx(1.0, 0.5));
        cplx total = f.atom;
        for (const auto& a : f.coeffs)
            total += a;
        out.push_back(check("Wiener-Hopf coefficients sum to 1", std::abs(total), 1.0, 1e-8));
    }

    {
        const HyperExpLevyModel bm({}, {}, 0.04, -0.01);
        const double x = 0.4, t = 2.0;
        const double inverted = invert(
            [&](cplx a) { return first_passage_transform(bm.reflected(), x, a).distribution; }, t, cfg.euler);
        out.push_back(check("Brownian passage vs reflection formula", inverted,
                            brownian_passage_probability(0.01, 0.04, x, t), 1e-6));
    }

    const int days = static_cast<int>(std::lround(360.0 * *std::max_element(cfg.horizons.begin(), cfg.horizons.end())));
    PassageCurveOptions curve_opts;
    curve_opts.euler = cfg.euler;
    const auto curve = passage_curve(model, cfg.barrier, days, curve_opts);
    {
        auto doubled = curve_opts;
        doubled.euler.n_terms *= 2;
        const auto fine = passage_curve(model, cfg.barrier, days, doubled);
        double worst = 0.0;
        for (std::size_t i = 0; i < curve.survival.size(); ++i)
            worst = std::max(worst, std::abs(curve.survival[i] - fine.survival[i]));
        out.push_back(check("survival stable under doubled Euler terms", worst, 0.0, 1e-6));
    }

    const auto mc = simulate_passage(model, cfg.barrier, cfg.horizons, cfg.sim);
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        const int day = static_cast<int>(std::lround(360.0 * cfg.horizons[h]));
        const double analytic = 1.0 - curve.survival_on(day);
        out.push_back(check(fmt::format("passage by T = {} vs Monte Carlo", cfg.horizons[h]), analytic,
                            mc[h].mean, 3.0 * mc[h].standard_error + 0.005));
    }

    {
        auto sim = cfg.sim;
        sim.paths = cfg.terminal_paths;
        const double T = 1.0;
        const auto x = simulate_terminal(model, T, sim);
        std::vector<double> growth(x.size()), payoff(x.size());
        const double strike = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            growth[i] = std::exp(x[i]);
            payoff[i] = std::exp(-cfg.rate * T) * std::max(growth[i] - strike, 0.0);
        }
        const auto g = summarize(growth);
        out.push_back(check("Monte Carlo mean of e^{X_T} vs e^{(r-q)T}", g.mean,
                            std::exp((cfg.rate - cfg.dividend_yield) * T), 3.0 * g.standard_error));
        const auto c = summarize(payoff);
        out.push_back(check("at-the-money call: Fourier vs Monte Carlo",
                            european_price(model, 1.0, strike, T, cfg.rate, cfg.dividend_yield), c.mean,
                            3.0 * c.standard_error));
    }
    return out;
}

} // namespace edslevy

#include "edslevy/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "edslevy/parallel.hpp"

namespace edslevy {

OptionType parse_option_type(const std::string& name)
{
    if (name == "call" || name == "C" || name == "c")
        return OptionType::call;
    if (name == "put" || name == "P" || name == "p")
        return OptionType::put;
    throw ConfigError(fmt::format("unknown option type '{}' (call or put)", name));
}

namespace {

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// e^{-rT} E[(F e^{vZ - v^2/2} - K)^+], v >= 0.
double lognormal_call(double forward, double strike, double stdev, double discount)
{
    if (stdev <= 0.0)
        return discount * std::max(forward - strike, 0.0);
    const double d1 = (std::log(forward / strike) + 0.5 * stdev * stdev) / stdev;
    return discount * (forward * normal_cdf(d1) - strike * normal_cdf(d1 - stdev));
}

void check_pricing_inputs(const HyperExpLevyModel& model, double spot, double strike, double maturity,
                          double r, double q)
{
    if (!(spot > 0.0) || !std::isfinite(spot))
        throw ConfigError(fmt::format("spot must be positive, got {}", spot));
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw ConfigError(fmt::format("strike must be positive, got {}", strike));
    if (!(maturity > 0.0) || !std::isfinite(maturity))
        throw ConfigError(fmt::format("maturity must be positive, got {}", maturity));
    if (!std::isfinite(r) || !std::isfinite(q))
        throw ConfigError("rate and dividend yield must be finite");
    const double k1 = model.exponent(1.0).real();
    if (std::abs(k1 - (r - q)) > 1e-9 * std::max(1.0, std::abs(r - q)))
        throw ConfigError(fmt::format("model is not risk-neutral: kappa(1) = {} but r - q = {}", k1, r - q));
}

} // namespace

double black_scholes_price(double spot, double strike, double maturity, double r, double q, double sigma,
                           OptionType type)
{
    const double forward = spot * std::exp((r - q) * maturity);
    const double discount = std::exp(-r * maturity);
    const double call = lognormal_call(forward, strike, sigma * std::sqrt(maturity), discount);
    if (type == OptionType::call)
        return call;
    return call - spot * std::exp(-q * maturity) + strike * discount;
}

double european_price(const HyperExpLevyModel& model, double spot, double strike, double maturity, double r,
                      double q, OptionType type, const FourierOptions& options)
{
    check_pricing_inputs(model, spot, strike, maturity, r, q);
    const double alpha_min = model.min_positive_rate();
    const double d = options.damping.value_or(std::min(0.75, 0.5 * (alpha_min - 1.0)));
    if (!(d > 0.0 && d < alpha_min - 1.0))
        throw ConfigError(fmt::format("damping {} outside (0, alpha_min - 1) = (0, {})", d, alpha_min - 1.0));

    // The no-jump component (probability e^{-lambda T}) has a closed form.
    // Subtracting its transform leaves an integrand that decays like the jump
    // part of the characteristic function, also when sigma = 0.
    const double T = maturity;
    const double lambda = model.lambda_plus() + model.lambda_minus();
    const double mu = model.mu();
    const double s2 = model.sigma2();
    const double discount = std::exp(-r * T);
    const double k = std::log(strike / spot);

    const double base = std::exp(-lambda * T) *
        lognormal_call(spot * std::exp((mu + 0.5 * s2) * T), strike, std::sqrt(s2 * T), discount);

    auto transform = [&](double u) {
        const cplx s(d + 1.0, u);
        const cplx continuous = mu * s + 0.5 * s2 * s * s;
        const cplx jump = model.exponent(s) - continuous;
        const cplx numerator = std::exp(T * continuous) * (std::exp(T * jump) - std::exp(-lambda * T));
        return numerator / cplx(d * d + d - u * u, (2.0 * d + 1.0) * u);
    };
    auto integrand = [&](double u) { return (std::exp(cplx(0.0, -u * k)) * transform(u)).real(); };

    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double scale = spot * std::exp(-d * k) * discount / std::numbers::pi;
    const double tol = options.tolerance / scale;

    double integral = 0.0;
    double lo = 0.0;
    double width = 10.0;
    int quiet_panels = 0;
    while (true) {
        double err = 0.0;
        const double panel = Quadrature::integrate(integrand, lo, lo + width, 15, 1e-10, &err);
        if (!std::isfinite(panel))
            throw NumericalError(fmt::format("Fourier integrand not finite on [{}, {}]", lo, lo + width));
        integral += panel;
        lo += width;
        // The envelope times the frequency bounds a tail decaying like 1/u^2;
        // it guards against a panel whose oscillations happen to cancel.
        const bool quiet = std::abs(panel) < 0.1 * tol && err < 0.1 * tol && std::abs(transform(lo)) * lo < 0.1 * tol;
        quiet_panels = quiet ? quiet_panels + 1 : 0;
        if (quiet_panels >= 2)
            break;
        if (lo >= 150.0) {
            // Past the oscillation scale the remaining algebraic tail is
            // handled by the rule mapped onto [lo, inf).
            double tail_err = 0.0;
            const double tail = Quadrature::integrate(integrand, lo, std::numeric_limits<double>::infinity(), 12,
                                                      1e-10, &tail_err);
            if (std::isfinite(tail) && tail_err < 0.1 * tol) {
                integral += tail;
                break;
            }
        }
        if (lo >= options.max_frequency)
            throw NumericalError(fmt::format(
                "Fourier integral not converged at frequency {} (strike {}, maturity {})", lo, strike, maturity));
        width *= 2.0;
    }

    const double call = base + scale * integral;
    if (!std::isfinite(call))
        throw NumericalError("Fourier price is not finite");
    if (type == OptionType::call)
        return call;
    return call - spot * std::exp(-q * T) + strike * discount;
}

void validate_quotes(const std::vector<OptionQuote>& quotes)
{
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const auto& o = quotes[i];
        if (!(o.strike > 0.0) || !(o.maturity > 0.0) || !(o.spot > 0.0) || !std::isfinite(o.price))
            throw ConfigError(fmt::format("quote {}: strike, maturity and spot must be positive", i));
        const double fwd_spot = o.spot * std::exp(-o.dividend_yield * o.maturity);
        const double pv_strike = o.strike * std::exp(-o.rate * o.maturity);
        const double slack = 1e-12 * std::max(o.spot, o.strike);
        double lower = 0.0, upper = 0.0;
        if (o.type == OptionType::call) {
            lower = std::max(fwd_spot - pv_strike, 0.0);
            upper = fwd_spot;
        } else {
            lower = std::max(pv_strike - fwd_spot, 0.0);
            upper = pv_strike;
        }
        if (o.price < lower - slack || o.price > upper + slack)
            throw ConfigError(fmt::format("quote {} violates the arbitrage bounds: price {} outside [{}, {}]",
                                          i, o.price, lower, upper));
    }
}

std::vector<double> model_prices(const CgmyParams& params, const std::vector<OptionQuote>& quotes,
                                 const CalibrationOptions& options)
{
    if (quotes.empty())
        return {};
    const double r = quotes.front().rate;
    const double q = quotes.front().dividend_yield;
    const auto model = assemble_model(options.mixture, params, r, q, options.diffusion);
    std::vector<double> prices(quotes.size());
    parallel_for(quotes.size(), [&](std::size_t i) {
        const auto& o = quotes[i];
        prices[i] = european_price(model, o.spot, o.strike, o.maturity, o.rate, o.dividend_yield, o.type,
                                   options.fourier);
    }, options.threads);
    return prices;
}

CalibrationResult calibrate(const std::vector<OptionQuote>& quotes, double fixed_Y, const CgmyParams& initial,
                            const CalibrationOptions& options)
{
    validate_quotes(quotes);
    std::set<std::tuple<double, double, int>> distinct;
    for (const auto& o : quotes)
        distinct.emplace(o.strike, o.maturity, static_cast<int>(o.type));
    if (distinct.size() < 3)
        throw ConfigError(fmt::format(
            "calibration needs at least 3 distinct quotes for 3 parameters, got {}", distinct.size()));
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const auto& o = quotes[i];
        if (o.maturity < options.min_maturity || o.maturity > options.max_maturity)
            throw ConfigError(fmt::format("quote {}: maturity {} outside the band [{}, {}]", i, o.maturity,
                                          options.min_maturity, options.max_maturity));
        if (o.rate != quotes.front().rate || o.dividend_yield != quotes.front().dividend_yield)
            throw ConfigError(fmt::format("quote {}: all quotes must share one rate and dividend yield", i));
    }
    if (std::abs(options.mixture.Y - fixed_Y) > 1e-12)
        throw ConfigError(fmt::format("mixture was fitted for Y = {}, calibration fixes Y = {}",
                                      options.mixture.Y, fixed_Y));
    CgmyParams start = initial;
    start.Y = fixed_Y;
    start.validate(true);
    if (!(start.C > 0.0))
        throw ConfigError("initial C must be positive");

    auto unpack = [&](std::span<const double> z) {
        return CgmyParams{std::exp(z[0]), std::exp(z[1]), 1.0 + std::exp(z[2]), fixed_Y};
    };
    auto residuals = [&](const CgmyParams& p) {
        auto prices = model_prices(p, quotes, options);
        for (std::size_t i = 0; i < prices.size(); ++i)
            prices[i] -= quotes[i].price;
        return prices;
    };
    auto rmse = [](const std::vector<double>& res) {
        double ss = 0.0;
        for (double e : res)
            ss += e * e;
        return std::sqrt(ss / static_cast<double>(res.size()));
    };
    const Objective objective = [&](std::span<const double> z) {
        try {
            return rmse(residuals(unpack(z)));
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const std::vector<double> z0{std::log(start.C), std::log(start.G), std::log(start.M - 1.0)};
    const auto fit = minimize_simplex(objective, z0, options.simplex);

    CalibrationResult result;
    result.params = unpack(fit.x);
    result.iterations = fit.iterations;
    result.evaluations = fit.evaluations;
    result.converged = fit.converged;
    if (std::isfinite(fit.value)) {
        result.residuals = residuals(result.params);
        result.rmse = rmse(result.residuals);
    } else {
        result.rmse = fit.value;
    }
    if (!fit.converged || !std::isfinite(fit.value))
        throw CalibrationError(fmt::format("calibration did not converge after {} evaluations (RMSE {})",
                                           fit.evaluations, result.rmse),
                               result);
    return result;
}

std::vector<OptionQuote> read_quotes_csv(std::istream& in, double spot, double rate, double dividend_yield)
{
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return std::string{};
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    std::string line;
    if (!std::getline(in, line) || trim(line) != "strike,maturity,price,type")
        throw ConfigError("quote CSV must start with the header 'strike,maturity,price,type'");
    std::vector<OptionQuote> quotes;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(trim(field));
        if (fields.size() != 4)
            throw ConfigError(fmt::format("quote CSV line {}: expected 4 fields, got {}", line_no, fields.size()));
        OptionQuote o;
        try {
            std::size_t used = 0;
            o.strike = std::stod(fields[0], &used);
            if (used != fields[0].size())
                throw std::invalid_argument("strike");
            o.maturity = std::stod(fields[1], &used);
            if (used != fields[1].size())
                throw std::invalid_argument("maturity");
            o.price = std::stod(fields[2], &used);
            if (used != fields[2].size())
                throw std::invalid_argument("price");
        } catch (const std::logic_error&) {
            throw ConfigError(fmt::format("quote CSV line {}: cannot parse numbers in '{}'", line_no, line));
        }
        o.type = parse_option_type(fields[3]);
        o.spot = spot;
        o.rate = rate;
        o.dividend_yield = dividend_yield;
        quotes.push_back(o);
    }
    return quotes;
}

} // namespace edslevy

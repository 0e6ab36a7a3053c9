#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "edslevy/levy_model.hpp"
#include "edslevy/optimizer.hpp"

namespace edslevy {

enum class OptionType { call, put };

OptionType parse_option_type(const std::string& name);

struct OptionQuote {
    double strike = 0.0;
    double maturity = 0.0;
    double price = 0.0;
    OptionType type = OptionType::call;
    double spot = 0.0;
    double rate = 0.0;
    double dividend_yield = 0.0;
};

struct FourierOptions {
    /// Damping of the call transform; must lie in (0, alpha_min - 1).
    /// Unset: min(0.75, (alpha_min - 1)/2).
    std::optional<double> damping;
    /// Absolute tolerance on the price.
    double tolerance = 1e-10;
    double max_frequency = 1e6;
};

/// European option price under the model via the damped Fourier transform of
/// the call (E[e^{s X_T}] = e^{T kappa(s)}); puts by parity. The model must
/// carry the risk-neutral drift, kappa(1) = r - q.
double european_price(const HyperExpLevyModel& model, double spot, double strike, double maturity, double r,
                      double q, OptionType type = OptionType::call, const FourierOptions& options = {});

/// Closed-form lognormal price, used for the pure-diffusion limit.
double black_scholes_price(double spot, double strike, double maturity, double r, double q, double sigma,
                           OptionType type);

struct CalibrationOptions {
    ExpMixtureFit mixture;
    std::optional<DiffusionConfig> diffusion = DiffusionConfig{};
    double min_maturity = 1.0;
    double max_maturity = 2.0;
    SimplexOptions simplex{4000, 1e-12, 1e-8, 0.2, 4};
    FourierOptions fourier;
    unsigned threads = 0;
};

struct CalibrationResult {
    CgmyParams params;
    double rmse = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> residuals; ///< model - market, per quote
};

class CalibrationError : public NumericalError {
public:
    CalibrationError(const std::string& what, CalibrationResult best)
        : NumericalError(what), best_(std::move(best)) {}
    const CalibrationResult& best() const { return best_; }

private:
    CalibrationResult best_;
};

/// Throws ConfigError naming the first quote that violates the no-arbitrage
/// bounds or has a non-positive strike or maturity.
void validate_quotes(const std::vector<OptionQuote>& quotes);

/// Model prices for a parameter set, one per quote.
std::vector<double> model_prices(const CgmyParams& params, const std::vector<OptionQuote>& quotes,
                                 const CalibrationOptions& options);

/// Least-squares fit of (C, G, M) with Y fixed, minimising the RMSE between
/// model and quoted prices. The simplex runs on (ln C, ln G, ln(M - 1)).
CalibrationResult calibrate(const std::vector<OptionQuote>& quotes, double fixed_Y, const CgmyParams& initial,
                            const CalibrationOptions& options);

/// CSV with header `strike,maturity,price,type`; spot, rate and yield are
/// supplied by the caller.
std::vector<OptionQuote> read_quotes_csv(std::istream& in, double spot, double rate, double dividend_yield);

} // namespace edslevy

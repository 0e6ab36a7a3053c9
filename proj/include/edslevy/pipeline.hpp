#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edslevy/eds.hpp"
#include "edslevy/monte_carlo.hpp"

namespace edslevy {

/// Every tunable of a pricing run. Built from a JSON document in which every
/// field is optional; unknown keys are rejected.
struct RunConfig {
    CgmyParams params{0.5, 2.0, 10.0, 0.5};

    /// "preset" uses the reference Y = 0.5 nodes; "fit" runs the node fit.
    std::string mixture_source = "preset";
    MixtureLayout layout;
    std::vector<double> start_nodes = reference_start_nodes();
    FitGrid fit_grid;
    int fit_max_evaluations = 200000;

    bool diffusion_enabled = true;
    DiffusionConfig diffusion;

    double rate = 0.05;
    double dividend_yield = 0.0;
    /// Optional `day,discount` CSV; the flat rate is used when empty.
    std::string curve_csv;

    double barrier = 0.3;
    double recovery = 0.5;
    double notional = 1.0;
    std::vector<double> maturities{1.0, 3.0, 5.0};
    CouponFrequency coupon_frequency = CouponFrequency::quarterly;

    EulerInversionParams euler;
    bool daycount_365 = true;
    double repair_tolerance = 1e-6;

    bool monte_carlo = false;
    SimConfig sim;

    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);

struct MaturityResult {
    double maturity = 0.0;
    EdsQuote quote;
    std::optional<McEstimate> mc_passage;
};

struct RunResult {
    RunConfig config;
    ExpMixtureFit mixture;
    HyperExpLevyModel model;
    FirstPassageCurve curve;
    std::vector<MaturityResult> maturities;
};

/// Mixture, model, passage curve and one EDS rate per maturity. A failing
/// stage is rethrown with the stage name prefixed, keeping the error type.
RunResult run_pipeline(const RunConfig& config);

nlohmann::json result_to_json(const RunResult& result);

/// results.json, passage_curve.csv, model.json, mixture.csv and
/// config.resolved.json in `directory` (created if missing).
void write_outputs(const RunResult& result, const std::string& directory);

/// 17 significant digits, the format of every CSV number.
std::string format_number(double value);

} // namespace edslevy

// Command-line front end: fit, wh-factor, first-passage, price-eds, calibrate,
// validate, pipeline. Exit codes: 0 ok, 2 configuration error, 3 numerical
// failure. EDSLEVY_THREADS overrides the worker count.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "edslevy/calibration.hpp"
#include "edslevy/pipeline.hpp"
#include "edslevy/validation.hpp"
#include "edslevy/wiener_hopf.hpp"

using namespace edslevy;
using nlohmann::json;

namespace {

// Model either from a saved model.json or assembled from CGMY parameters.
struct ModelArgs {
    std::string model_path;
    std::vector<double> cgmy{0.5, 2.0, 10.0, 0.5};
    double rate = 0.05;
    double dividend_yield = 0.0;
    bool no_diffusion = false;
    double cutoff = 0.25;
    double terminal_ratio = 0.6;
    bool n_minus_one = false;

    void add(CLI::App* app)
    {
        app->add_option("--model", model_path, "model.json written by `pipeline` or `fit`");
        app->add_option("--cgmy", cgmy, "C,G,M,Y")->delimiter(',')->expected(4);
        app->add_option("--rate", rate, "risk-free rate");
        app->add_option("--div-yield", dividend_yield, "dividend yield");
        app->add_flag("--no-diffusion", no_diffusion, "skip the small-jump diffusion term");
        app->add_option("--cutoff", cutoff, "small-jump cutoff epsilon");
        app->add_option("--terminal-ratio", terminal_ratio, "last mixture spacing as a multiple of the last node");
        app->add_flag("--n-minus-one", n_minus_one, "last node only sets a spacing (N-1 terms)");
    }

    MixtureLayout layout() const
    {
        MixtureLayout l;
        if (n_minus_one)
            l.terminal_spacing_ratio.reset();
        else
            l.terminal_spacing_ratio = terminal_ratio;
        return l;
    }

    CgmyParams params() const { return {cgmy[0], cgmy[1], cgmy[2], cgmy[3]}; }

    HyperExpLevyModel build() const
    {
        if (!model_path.empty())
            return load_model(model_path);
        const auto p = params();
        p.validate(true);
        if (std::abs(p.Y - 0.5) > 1e-15)
            throw ConfigError("without --model only Y = 0.5 is available ((reference nodes)); run `fit` first");
        std::optional<DiffusionConfig> diffusion;
        if (!no_diffusion)
            diffusion = DiffusionConfig{cutoff};
        return assemble_model(reference_mixture(layout()), p, rate, dividend_yield, diffusion);
    }
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

void print(const json& doc) { std::cout << doc.dump(2) << '\n'; }

int run_fit(double y, const std::vector<double>& start, const std::vector<double>& grid, bool n_minus_one,
            double ratio, bool preset, const std::string& out_csv)
{
    MixtureLayout layout;
    if (n_minus_one)
        layout.terminal_spacing_ratio.reset();
    else
        layout.terminal_spacing_ratio = ratio;
    ExpMixtureFit fit;
    if (preset) {
        fit = reference_mixture(layout);
    } else {
        MixtureFitOptions opts;
        opts.layout = layout;
        fit = fit_exponential_mixture(y, start, FitGrid{grid[0], grid[1], grid[2]}, opts);
    }
    const auto points = FitGrid{grid[0], grid[1], grid[2]}.points();
    print({{"id", fit.id},
           {"Y", fit.Y},
           {"nodes", fit.nodes},
           {"rates", fit.rates},
           {"weights", fit.weights},
           {"sse", mixture_sse(fit, points)},
           {"max_relative_error", max_relative_error(fit, points)},
           {"iterations", fit.iterations},
           {"evaluations", fit.evaluations}});
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out)
            throw ConfigError(fmt::format("cannot write '{}'", out_csv));
        out << "rate,weight\n";
        for (std::size_t i = 0; i < fit.rates.size(); ++i)
            out << format_number(fit.rates[i]) << ',' << format_number(fit.weights[i]) << '\n';
    }
    return 0;
}

int run_wh(const ModelArgs& margs, const std::vector<double>& a, bool down)
{
    auto model = margs.build();
    if (down)
        model = model.reflected();
    const auto f = wh_plus_factor(model, cplx(a[0], a.size() > 1 ? a[1] : 0.0));
    json roots = json::array(), coeffs = json::array();
    for (const auto& r : f.rho)
        roots.push_back(complex_json(r));
    for (const auto& c : f.coeffs)
        coeffs.push_back(complex_json(c));
    print({{"a", complex_json(f.a)},
           {"side", down ? "infimum" : "supremum"},
           {"roots", roots},
           {"coefficients", coeffs},
           {"atom", complex_json(f.atom)}});
    return 0;
}

int run_first_passage(const ModelArgs& margs, double barrier, double maturity, const std::string& out_csv,
                      bool calendar_daycount)
{
    const auto model = margs.build();
    PassageCurveOptions opts;
    opts.daycount_365 = !calendar_daycount;
    const int days = static_cast<int>(std::lround(360.0 * maturity));
    const auto curve = passage_curve(model, barrier, days, opts);
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out)
            throw ConfigError(fmt::format("cannot write '{}'", out_csv));
        out << "day,time,survival,density,day_probability\n";
        for (std::size_t i = 0; i < curve.days.size(); ++i)
            out << curve.days[i] << ',' << format_number(curve.times[i]) << ','
                << format_number(curve.survival[i]) << ',' << format_number(curve.density[i]) << ','
                << format_number(curve.day_probability[i]) << '\n';
    }
    print({{"barrier", barrier},
           {"days", days},
           {"survival_at_maturity", curve.survival_on(days)},
           {"survival_repairs", curve.survival_repairs},
           {"density_clamps", curve.density_clamps}});
    return 0;
}

int run_price(const ModelArgs& margs, double barrier, double recovery, const std::vector<double>& maturities,
              const std::string& frequency, const std::string& curve_csv)
{
    const auto model = margs.build();
    const auto freq = parse_coupon_frequency(frequency);
    double longest = 0.0;
    for (double T : maturities)
        longest = std::max(longest, T);
    const int days = static_cast<int>(std::lround(360.0 * longest));
    const auto curve = passage_curve(model, barrier, days);
    const auto discount = curve_csv.empty() ? DiscountCurve::flat(margs.rate, days)
                                            : DiscountCurve::from_csv_file(curve_csv, days);
    json rows = json::array();
    for (double T : maturities) {
        const auto q = eds_rate(EdsContract::standard(T, barrier, recovery, freq), discount, curve);
        rows.push_back({{"maturity", T}, {"rate", q.rate}, {"rate_bp", q.rate_bp},
                        {"survival", q.survival_at_maturity}});
    }
    print({{"barrier", barrier}, {"recovery", recovery}, {"coupon_frequency", frequency}, {"eds", rows}});
    return 0;
}

int run_calibrate(const std::string& quotes_csv, double y, double spot, double rate, double q,
                  const std::vector<double>& init, bool no_diffusion)
{
    std::ifstream in(quotes_csv);
    if (!in)
        throw ConfigError(fmt::format("cannot open quotes '{}'", quotes_csv));
    const auto quotes = read_quotes_csv(in, spot, rate, q);
    CalibrationOptions opts;
    if (std::abs(y - 0.5) > 1e-15)
        throw ConfigError("calibration uses the reference Y = 0.5 mixture; --y must be 0.5");
    opts.mixture = reference_mixture();
    if (no_diffusion)
        opts.diffusion.reset();
    auto report = [](const CalibrationResult& r) {
        return json{{"C", r.params.C}, {"G", r.params.G}, {"M", r.params.M}, {"Y", r.params.Y},
                    {"rmse", r.rmse}, {"iterations", r.iterations}, {"evaluations", r.evaluations},
                    {"converged", r.converged}, {"residuals", r.residuals}};
    };
    try {
        print(report(calibrate(quotes, y, CgmyParams{init[0], init[1], init[2], y}, opts)));
    } catch (const CalibrationError& e) {
        print(report(e.best()));
        throw;
    }
    return 0;
}

int run_validate(const ValidationConfig& cfg)
{
    const auto checks = run_validation(cfg);
    bool all = true;
    fmt::print("{:<48} {:>22} {:>22} {:>10}  {}\n", "check", "value", "reference", "tolerance", "result");
    for (const auto& c : checks) {
        fmt::print("{:<48} {:>22.15g} {:>22.15g} {:>10.3g}  {}\n", c.name, c.value, c.reference, c.tolerance,
                   c.passed ? "PASS" : "FAIL");
        all = all && c.passed;
    }
    return all ? 0 : 3;
}

int run_pipeline_cmd(const std::string& config_path, const std::string& out_dir, bool print_config)
{
    RunConfig config = config_path.empty() ? config_from_json(json::object()) : load_config(config_path);
    if (print_config) {
        print(config_to_json(config));
        return 0;
    }
    const auto result = run_pipeline(config);
    write_outputs(result, out_dir);
    json summary = json::array();
    for (const auto& m : result.maturities)
        summary.push_back({{"maturity", m.maturity}, {"rate_bp", m.quote.rate_bp}});
    print({{"output", out_dir}, {"eds", summary}});
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"CGMY to hyperexponential jump-diffusion: first passage and equity default swaps"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "fit the exponential mixture for x^{-1-Y}");
    double fit_y = 0.5;
    std::vector<double> fit_start = reference_start_nodes();
    std::vector<double> fit_grid{0.25, 5.0, 0.025};
    bool fit_n1 = false, fit_preset = false;
    double fit_ratio = 0.6;
    std::string fit_csv;
    fit->add_option("--y", fit_y, "CGMY Y in (0, 1)");
    fit->add_option("--start", fit_start, "starting nodes")->delimiter(',');
    fit->add_option("--grid", fit_grid, "min,max,step")->delimiter(',')->expected(3);
    fit->add_option("--terminal-ratio", fit_ratio, "last spacing as a multiple of the last node");
    fit->add_flag("--n-minus-one", fit_n1, "last node only sets a spacing");
    fit->add_flag("--preset", fit_preset, "report the reference Y = 0.5 nodes instead of fitting");
    fit->add_option("--csv", fit_csv, "write rate,weight CSV");

    ModelArgs wh_model, fp_model, eds_model;
    auto* wh = app.add_subcommand("wh-factor", "Wiener-Hopf roots and coefficients at a transform argument");
    wh_model.add(wh);
    std::vector<double> wh_a{1.0, 0.0};
    bool wh_down = false;
    wh->add_option("--a", wh_a, "transform argument re[,im]")->delimiter(',');
    wh->add_flag("--infimum", wh_down, "factor of the running infimum (reflected model)");

    auto* fp = app.add_subcommand("first-passage", "survival and passage density on the daily grid");
    fp_model.add(fp);
    double fp_barrier = 0.3, fp_maturity = 5.0;
    std::string fp_csv;
    bool fp_calendar = false;
    fp->add_option("--barrier", fp_barrier, "barrier as a fraction of the initial price");
    fp->add_option("--maturity", fp_maturity, "horizon in years");
    fp->add_option("--csv", fp_csv, "write the curve");
    fp->add_flag("--daycount-360", fp_calendar, "day probability f/360 instead of f/365");

    auto* eds = app.add_subcommand("price-eds", "equity default swap rates");
    eds_model.add(eds);
    double eds_barrier = 0.3, eds_recovery = 0.5;
    std::vector<double> eds_maturities{1.0, 3.0, 5.0};
    std::string eds_freq = "quarterly", eds_curve;
    eds->add_option("--barrier", eds_barrier, "barrier fraction");
    eds->add_option("--recovery", eds_recovery, "recovery rate");
    eds->add_option("--maturity", eds_maturities, "maturities in years")->delimiter(',');
    eds->add_option("--frequency", eds_freq, "annual, semiannual, quarterly or monthly");
    eds->add_option("--curve-csv", eds_curve, "discount curve with header day,discount");

    auto* cal = app.add_subcommand("calibrate", "fit C, G, M to European option quotes");
    std::string cal_quotes;
    double cal_y = 0.5, cal_spot = 100.0, cal_rate = 0.05, cal_q = 0.0;
    std::vector<double> cal_init{0.5, 2.0, 10.0};
    bool cal_no_diffusion = false;
    cal->add_option("--quotes-csv", cal_quotes, "strike,maturity,price,type")->required();
    cal->add_option("--y", cal_y, "fixed Y");
    cal->add_option("--spot", cal_spot, "spot price");
    cal->add_option("--rate", cal_rate, "risk-free rate");
    cal->add_option("--div-yield", cal_q, "dividend yield");
    cal->add_option("--init", cal_init, "initial C,G,M")->delimiter(',')->expected(3);
    cal->add_flag("--no-diffusion", cal_no_diffusion, "skip the small-jump diffusion term");

    auto* val = app.add_subcommand("validate", "cross-check closed forms, inversion and Monte Carlo");
    ValidationConfig vcfg;
    vcfg.sim.paths = 20000;
    bool val_no_bridge = false;
    val->add_option("--paths", vcfg.sim.paths, "Monte Carlo passage paths");
    val->add_option("--terminal-paths", vcfg.terminal_paths, "Monte Carlo terminal paths");
    val->add_option("--seed", vcfg.sim.seed, "random seed");
    val->add_option("--dt", vcfg.sim.dt, "simulation step in years");
    val->add_option("--barrier", vcfg.barrier, "barrier fraction");
    val->add_flag("--no-bridge", val_no_bridge, "disable the Brownian-bridge correction");

    auto* pipe = app.add_subcommand("pipeline", "fit, model, passage curve and EDS rates from one config");
    std::string pipe_config, pipe_out = "edslevy-out";
    bool pipe_print = false;
    pipe->add_option("--config", pipe_config, "JSON run config (all fields optional)");
    pipe->add_option("--out", pipe_out, "output directory");
    pipe->add_flag("--print-config", pipe_print, "print the resolved config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*fit)
            return run_fit(fit_y, fit_start, fit_grid, fit_n1, fit_ratio, fit_preset, fit_csv);
        if (*wh)
            return run_wh(wh_model, wh_a, wh_down);
        if (*fp)
            return run_first_passage(fp_model, fp_barrier, fp_maturity, fp_csv, fp_calendar);
        if (*eds)
            return run_price(eds_model, eds_barrier, eds_recovery, eds_maturities, eds_freq, eds_curve);
        if (*cal)
            return run_calibrate(cal_quotes, cal_y, cal_spot, cal_rate, cal_q, cal_init, cal_no_diffusion);
        if (*val) {
            vcfg.sim.bridge = !val_no_bridge;
            return run_validate(vcfg);
        }
        if (*pipe)
            return run_pipeline_cmd(pipe_config, pipe_out, pipe_print);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

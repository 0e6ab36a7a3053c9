#include "edslevy/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace edslevy {

namespace {

using nlohmann::json;

// Reads optional fields of one JSON object and remembers which keys were
// consumed, so leftovers can be reported as unknown.
class Section {
public:
    Section(const json& doc, std::string where) : doc_(doc), where_(std::move(where))
    {
        if (!doc_.is_object())
            throw ConfigError(fmt::format("config section '{}' must be an object", where_));
    }

    const json* find(const char* key)
    {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    void number(const char* key, double& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_number())
                throw ConfigError(fmt::format("{}.{} must be a number", where_, key));
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer() || (std::is_unsigned_v<Int> && v->get<long long>() < 0))
                throw ConfigError(fmt::format("{}.{} must be a {}integer", where_, key,
                                              std::is_unsigned_v<Int> ? "non-negative " : ""));
            out = v->get<Int>();
        }
    }

    void boolean(const char* key, bool& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_boolean())
                throw ConfigError(fmt::format("{}.{} must be true or false", where_, key));
            out = v->get<bool>();
        }
    }

    void string(const char* key, std::string& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_string())
                throw ConfigError(fmt::format("{}.{} must be a string", where_, key));
            out = v->get<std::string>();
        }
    }

    void numbers(const char* key, std::vector<double>& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_array() || std::any_of(v->begin(), v->end(), [](const json& e) { return !e.is_number(); }))
                throw ConfigError(fmt::format("{}.{} must be an array of numbers", where_, key));
            out = v->get<std::vector<double>>();
        }
    }

    std::optional<Section> child(const char* key)
    {
        if (const auto* v = find(key))
            return Section(*v, where_ + "." + key);
        return std::nullopt;
    }

    void finish() const
    {
        for (const auto& [key, value] : doc_.items())
            if (!seen_.count(key))
                throw ConfigError(fmt::format("unknown key '{}' in config section '{}'", key, where_));
    }

private:
    const json& doc_;
    std::string where_;
    std::set<std::string> seen_;
};

template <typename F>
auto stage(const char* name, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("stage '{}': {}", name, e.what()));
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("stage '{}': {}", name, e.what()));
    }
}

} // namespace

void RunConfig::validate() const
{
    params.validate(true);
    if (mixture_source != "preset" && mixture_source != "fit")
        throw ConfigError(fmt::format("mixture.source must be 'preset' or 'fit', got '{}'", mixture_source));
    if (mixture_source == "preset" && std::abs(params.Y - 0.5) > 1e-15)
        throw ConfigError("the preset mixture is for Y = 0.5; use mixture.source = 'fit' for other Y");
    if (layout.terminal_spacing_ratio && !(*layout.terminal_spacing_ratio > 0.0))
        throw ConfigError("mixture.terminal_spacing_ratio must be positive or null");
    if (!(fit_grid.step > 0.0) || !(fit_grid.min > 0.0) || !(fit_grid.max > fit_grid.min))
        throw ConfigError("mixture.grid needs 0 < min < max and step > 0");
    if (!(diffusion.cutoff > 0.0))
        throw ConfigError("diffusion.cutoff must be positive");
    if (!std::isfinite(rate) || !std::isfinite(dividend_yield))
        throw ConfigError("market rates must be finite");
    if (maturities.empty())
        throw ConfigError("contract.maturities must not be empty");
    for (double T : maturities)
        EdsContract::standard(T, barrier, recovery, coupon_frequency, notional);
    euler.validate();
    if (!(repair_tolerance >= 0.0))
        throw ConfigError("inversion.repair_tolerance must be non-negative");
    sim.validate();
}

RunConfig config_from_json(const json& doc)
{
    RunConfig c;
    Section root(doc, "config");
    if (auto s = root.child("cgmy")) {
        s->number("C", c.params.C);
        s->number("G", c.params.G);
        s->number("M", c.params.M);
        s->number("Y", c.params.Y);
        s->finish();
    }
    if (auto s = root.child("mixture")) {
        s->string("source", c.mixture_source);
        if (const auto* v = s->find("terminal_spacing_ratio")) {
            if (v->is_null())
                c.layout.terminal_spacing_ratio.reset();
            else if (v->is_number())
                c.layout.terminal_spacing_ratio = v->get<double>();
            else
                throw ConfigError("mixture.terminal_spacing_ratio must be a number or null");
        }
        s->numbers("start_nodes", c.start_nodes);
        if (auto g = s->child("grid")) {
            g->number("min", c.fit_grid.min);
            g->number("max", c.fit_grid.max);
            g->number("step", c.fit_grid.step);
            g->finish();
        }
        s->integer("max_evaluations", c.fit_max_evaluations);
        s->finish();
    }
    if (auto s = root.child("diffusion")) {
        s->boolean("enabled", c.diffusion_enabled);
        s->number("cutoff", c.diffusion.cutoff);
        s->number("tolerance", c.diffusion.tolerance);
        s->integer("max_depth", c.diffusion.max_depth);
        s->finish();
    }
    if (auto s = root.child("market")) {
        s->number("rate", c.rate);
        s->number("dividend_yield", c.dividend_yield);
        s->string("curve_csv", c.curve_csv);
        s->finish();
    }
    if (auto s = root.child("contract")) {
        s->number("barrier", c.barrier);
        s->number("recovery", c.recovery);
        s->number("notional", c.notional);
        s->numbers("maturities", c.maturities);
        std::string freq = to_string(c.coupon_frequency);
        s->string("coupon_frequency", freq);
        c.coupon_frequency = parse_coupon_frequency(freq);
        s->finish();
    }
    if (auto s = root.child("inversion")) {
        s->number("A", c.euler.A);
        s->integer("n_terms", c.euler.n_terms);
        s->integer("m_euler", c.euler.m_euler);
        s->boolean("daycount_365", c.daycount_365);
        s->number("repair_tolerance", c.repair_tolerance);
        s->finish();
    }
    if (auto s = root.child("monte_carlo")) {
        s->boolean("enabled", c.monte_carlo);
        s->integer("paths", c.sim.paths);
        s->integer("seed", c.sim.seed);
        s->number("dt", c.sim.dt);
        s->boolean("bridge", c.sim.bridge);
        s->integer("partitions", c.sim.partitions);
        s->finish();
    }
    root.finish();
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c)
{
    json doc;
    doc["cgmy"] = {{"C", c.params.C}, {"G", c.params.G}, {"M", c.params.M}, {"Y", c.params.Y}};
    doc["mixture"] = {{"source", c.mixture_source},
                      {"terminal_spacing_ratio", c.layout.terminal_spacing_ratio
                                                     ? json(*c.layout.terminal_spacing_ratio)
                                                     : json(nullptr)},
                      {"start_nodes", c.start_nodes},
                      {"grid", {{"min", c.fit_grid.min}, {"max", c.fit_grid.max}, {"step", c.fit_grid.step}}},
                      {"max_evaluations", c.fit_max_evaluations}};
    doc["diffusion"] = {{"enabled", c.diffusion_enabled},
                        {"cutoff", c.diffusion.cutoff},
                        {"tolerance", c.diffusion.tolerance},
                        {"max_depth", c.diffusion.max_depth}};
    doc["market"] = {{"rate", c.rate}, {"dividend_yield", c.dividend_yield}, {"curve_csv", c.curve_csv}};
    doc["contract"] = {{"barrier", c.barrier},
                       {"recovery", c.recovery},
                       {"notional", c.notional},
                       {"maturities", c.maturities},
                       {"coupon_frequency", to_string(c.coupon_frequency)}};
    doc["inversion"] = {{"A", c.euler.A},
                        {"n_terms", c.euler.n_terms},
                        {"m_euler", c.euler.m_euler},
                        {"daycount_365", c.daycount_365},
                        {"repair_tolerance", c.repair_tolerance}};
    doc["monte_carlo"] = {{"enabled", c.monte_carlo},
                          {"paths", c.sim.paths},
                          {"seed", c.sim.seed},
                          {"dt", c.sim.dt},
                          {"bridge", c.sim.bridge},
                          {"partitions", c.sim.partitions}};
    return doc;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config '{}'", path));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
    }
    return config_from_json(doc);
}

RunResult run_pipeline(const RunConfig& config)
{
    config.validate();
    RunResult out;
    out.config = config;

    out.mixture = stage("fit", [&] {
        if (config.mixture_source == "preset")
            return reference_mixture(config.layout);
        MixtureFitOptions opts;
        opts.layout = config.layout;
        opts.max_evaluations = config.fit_max_evaluations;
        return fit_exponential_mixture(config.params.Y, config.start_nodes, config.fit_grid, opts);
    });

    out.model = stage("model", [&] {
        std::optional<DiffusionConfig> diffusion;
        if (config.diffusion_enabled)
            diffusion = config.diffusion;
        return assemble_model(out.mixture, config.params, config.rate, config.dividend_yield, diffusion);
    });

    const double longest = *std::max_element(config.maturities.begin(), config.maturities.end());
    const int days = static_cast<int>(std::lround(360.0 * longest));

    out.curve = stage("first-passage", [&] {
        PassageCurveOptions opts;
        opts.euler = config.euler;
        opts.daycount_365 = config.daycount_365;
        opts.repair_tolerance = config.repair_tolerance;
        return passage_curve(out.model, config.barrier, days, opts);
    });

    const auto discount = stage("discount", [&] {
        return config.curve_csv.empty() ? DiscountCurve::flat(config.rate, days)
                                        : DiscountCurve::from_csv_file(config.curve_csv, days);
    });

    stage("price-eds", [&] {
        for (double T : config.maturities) {
            const auto contract =
                EdsContract::standard(T, config.barrier, config.recovery, config.coupon_frequency, config.notional);
            out.maturities.push_back({T, eds_rate(contract, discount, out.curve), std::nullopt});
        }
        return 0;
    });

    if (config.monte_carlo) {
        stage("monte-carlo", [&] {
            const auto mc = simulate_passage(out.model, config.barrier, config.maturities, config.sim);
            for (std::size_t i = 0; i < mc.size(); ++i)
                out.maturities[i].mc_passage = mc[i];
            return 0;
        });
    }
    return out;
}

json result_to_json(const RunResult& r)
{
    json doc;
    doc["config"] = config_to_json(r.config);
    doc["mixture"] = {{"id", r.mixture.id},
                      {"Y", r.mixture.Y},
                      {"nodes", r.mixture.nodes},
                      {"rates", r.mixture.rates},
                      {"weights", r.mixture.weights},
                      {"residual_norm", r.mixture.residual_norm}};
    doc["model"] = model_to_json(r.model);
    doc["passage_curve"] = {{"barrier", r.curve.barrier},
                            {"days", r.curve.last_day()},
                            {"survival_repairs", r.curve.survival_repairs},
                            {"density_clamps", r.curve.density_clamps}};
    json rows = json::array();
    for (const auto& m : r.maturities) {
        json row = {{"maturity", m.maturity},
                    {"rate", m.quote.rate},
                    {"rate_bp", m.quote.rate_bp},
                    {"survival", m.quote.survival_at_maturity},
                    {"protection_leg", m.quote.protection_leg},
                    {"premium_annuity", m.quote.premium_annuity},
                    {"accrual_annuity", m.quote.accrual_annuity}};
        if (m.mc_passage)
            row["monte_carlo_passage"] = {{"probability", m.mc_passage->mean},
                                          {"standard_error", m.mc_passage->standard_error},
                                          {"paths", m.mc_passage->paths}};
        rows.push_back(row);
    }
    doc["eds"] = rows;
    return doc;
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_outputs(const RunResult& result, const std::string& directory)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec)
        throw ConfigError(fmt::format("cannot create output directory '{}': {}", directory, ec.message()));
    const fs::path dir(directory);

    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out)
            throw ConfigError(fmt::format("cannot write '{}'", (dir / name).string()));
        return out;
    };

    open("results.json") << result_to_json(result).dump(2) << '\n';
    open("config.resolved.json") << config_to_json(result.config).dump(2) << '\n';
    open("model.json") << model_to_json(result.model).dump(2) << '\n';

    {
        auto out = open("passage_curve.csv");
        out << "day,time,survival,density,day_probability\n";
        const auto& c = result.curve;
        for (std::size_t i = 0; i < c.days.size(); ++i)
            out << c.days[i] << ',' << format_number(c.times[i]) << ',' << format_number(c.survival[i]) << ','
                << format_number(c.density[i]) << ',' << format_number(c.day_probability[i]) << '\n';
    }
    {
        auto out = open("mixture.csv");
        out << "rate,weight\n";
        const auto& m = result.mixture;
        for (std::size_t i = 0; i < m.rates.size(); ++i)
            out << format_number(m.rates[i]) << ',' << format_number(m.weights[i]) << '\n';
    }
}

} // namespace edslevy

#include "edslevy/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace edslevy {

namespace {

void check_terms(const std::vector<ExpTerm>& terms, const char* side)
{
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (!(t.intensity >= 0.0) || !std::isfinite(t.intensity))
            throw ConfigError(fmt::format("{} term {} has invalid intensity {}", side, i, t.intensity));
        if (!(t.rate > 0.0) || !std::isfinite(t.rate))
            throw ConfigError(fmt::format("{} term {} has non-positive rate {}", side, i, t.rate));
        for (std::size_t j = 0; j < i; ++j)
            if (terms[j].rate == t.rate)
                throw ConfigError(fmt::format("{} terms {} and {} share rate {}", side, j, i, t.rate));
    }
}

double total_mass(const std::vector<ExpTerm>& terms)
{
    double lambda = 0.0;
    for (const auto& t : terms)
        lambda += t.intensity / t.rate;
    return lambda;
}

std::vector<double> phase_probabilities(const std::vector<ExpTerm>& terms)
{
    const double lambda = total_mass(terms);
    std::vector<double> pi;
    if (lambda <= 0.0)
        return pi;
    for (const auto& t : terms)
        pi.push_back(t.intensity / (lambda * t.rate));
    return pi;
}

double min_active_rate(const std::vector<ExpTerm>& terms)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.intensity > 0.0)
            m = std::min(m, t.rate);
    return m;
}

void check_pole(cplx s, double pole, const char* side)
{
    if (std::abs(s - pole) <= 1e-14 * std::max(1.0, std::abs(pole)))
        throw NumericalError(fmt::format("characteristic exponent evaluated at its {} pole {}", side, pole));
}

} // namespace

HyperExpLevyModel::HyperExpLevyModel(std::vector<ExpTerm> positive, std::vector<ExpTerm> negative,
                                     double sigma2, double mu, ModelProvenance provenance)
    : positive_(std::move(positive)), negative_(std::move(negative)), sigma2_(sigma2), mu_(mu),
      provenance_(std::move(provenance))
{
    check_terms(positive_, "positive");
    check_terms(negative_, "negative");
    if (!(sigma2_ >= 0.0) || !std::isfinite(sigma2_))
        throw ConfigError(fmt::format("diffusion variance must be non-negative, got {}", sigma2_));
    if (!std::isfinite(mu_))
        throw ConfigError("drift must be finite");
}

double HyperExpLevyModel::lambda_plus() const { return total_mass(positive_); }
double HyperExpLevyModel::lambda_minus() const { return total_mass(negative_); }
std::vector<double> HyperExpLevyModel::pi_plus() const { return phase_probabilities(positive_); }
std::vector<double> HyperExpLevyModel::pi_minus() const { return phase_probabilities(negative_); }

cplx HyperExpLevyModel::exponent(cplx s) const
{
    // lambda pi (alpha/(alpha - s) - 1) = (a/alpha) s/(alpha - s); the
    // rearranged form is exact at s = 0.
    cplx k = mu_ * s + 0.5 * sigma2_ * s * s;
    for (const auto& t : positive_) {
        if (t.intensity == 0.0)
            continue;
        check_pole(s, t.rate, "positive");
        k += (t.intensity / t.rate) * s / (t.rate - s);
    }
    for (const auto& t : negative_) {
        if (t.intensity == 0.0)
            continue;
        check_pole(s, -t.rate, "negative");
        k -= (t.intensity / t.rate) * s / (t.rate + s);
    }
    return k;
}

cplx HyperExpLevyModel::exponent_derivative(cplx s) const
{
    cplx d = mu_ + sigma2_ * s;
    for (const auto& t : positive_) {
        if (t.intensity == 0.0)
            continue;
        check_pole(s, t.rate, "positive");
        const cplx g = t.rate - s;
        d += t.intensity / (g * g);
    }
    for (const auto& t : negative_) {
        if (t.intensity == 0.0)
            continue;
        check_pole(s, -t.rate, "negative");
        const cplx g = t.rate + s;
        d -= t.intensity / (g * g);
    }
    return d;
}

HyperExpLevyModel HyperExpLevyModel::reflected() const
{
    HyperExpLevyModel m = *this;
    std::swap(m.positive_, m.negative_);
    m.mu_ = -mu_;
    if (m.provenance_.params) {
        std::swap(m.provenance_.params->G, m.provenance_.params->M);
    }
    return m;
}

HyperExpLevyModel HyperExpLevyModel::with_drift(double mu) const
{
    return HyperExpLevyModel(positive_, negative_, sigma2_, mu, provenance_);
}

HyperExpLevyModel HyperExpLevyModel::with_sigma2(double sigma2) const
{
    return HyperExpLevyModel(positive_, negative_, sigma2, mu_, provenance_);
}

double HyperExpLevyModel::min_positive_rate() const { return min_active_rate(positive_); }
double HyperExpLevyModel::min_negative_rate() const { return min_active_rate(negative_); }

bool operator==(const HyperExpLevyModel& a, const HyperExpLevyModel& b)
{
    auto same = [](const std::vector<ExpTerm>& x, const std::vector<ExpTerm>& y) {
        return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const ExpTerm& p, const ExpTerm& q) {
            return p.intensity == q.intensity && p.rate == q.rate;
        });
    };
    return same(a.positive_, b.positive_) && same(a.negative_, b.negative_) &&
           a.sigma2_ == b.sigma2_ && a.mu_ == b.mu_;
}

cplx characteristic_exponent(const HyperExpLevyModel& model, cplx s) { return model.exponent(s); }
HyperExpLevyModel reflect(const HyperExpLevyModel& model) { return model.reflected(); }

namespace {

// int_0^eps x^2 (C e^{-tilt x} x^{-1-Y} - sum c_i e^{-r_i x}) dx with x = eps w^2.
double residual_second_moment(double C, double tilt, double Y, const std::vector<ExpTerm>& terms,
                              const DiffusionConfig& cfg)
{
    const double eps = cfg.cutoff;
    const double eps_pow = std::pow(eps, 1.0 - Y);
    auto integrand = [&](double w) {
        const double x = eps * w * w;
        const double jacobian = 2.0 * eps * w;
        double mixture = 0.0;
        for (const auto& t : terms)
            mixture += t.intensity * std::exp(-t.rate * x);
        // x^2 * x^{-1-Y} = x^{1-Y} = eps^{1-Y} w^{2-2Y}
        const double power_part = C * std::exp(-tilt * x) * eps_pow * std::pow(w, 2.0 - 2.0 * Y);
        return (power_part - x * x * mixture) * jacobian;
    };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, 1.0, cfg.max_depth, cfg.tolerance, &error);
    if (!std::isfinite(value) || error > std::max(1e-10 * std::abs(value), 1e-16))
        throw NumericalError(fmt::format(
            "small-jump variance quadrature did not converge (cutoff {}, error estimate {})", eps, error));
    return value;
}

} // namespace

std::pair<double, double> small_jump_variance_sides(const CgmyParams& params,
                                                     const TwoSidedDensity& density,
                                                     const DiffusionConfig& cfg)
{
    params.validate();
    if (!(cfg.cutoff > 0.0) || !std::isfinite(cfg.cutoff))
        throw ConfigError(fmt::format("diffusion cutoff must be positive, got {}", cfg.cutoff));
    const double up = residual_second_moment(params.C, params.M, params.Y, density.positive, cfg);
    const double down = residual_second_moment(params.C, params.G, params.Y, density.negative, cfg);
    return {up, down};
}

double small_jump_variance(const CgmyParams& params, const TwoSidedDensity& density,
                           const DiffusionConfig& cfg)
{
    const auto [up, down] = small_jump_variance_sides(params, density, cfg);
    const double sigma2 = up + down;
    if (sigma2 < 0.0)
        throw NumericalError(fmt::format(
            "small-jump variance is negative ({}) at cutoff {}: the mixture overshoots the CGMY density",
            sigma2, cfg.cutoff));
    return sigma2;
}

double risk_neutral_drift(const HyperExpLevyModel& model, double r, double q)
{
    double jumps = 0.0;
    for (const auto& t : model.positive()) {
        if (t.intensity == 0.0)
            continue;
        if (!(t.rate > 1.0))
            throw NumericalError(fmt::format(
                "positive jump rate {} <= 1: E[exp(X_1)] is infinite, no risk-neutral drift", t.rate));
        jumps += (t.intensity / t.rate) / (t.rate - 1.0);
    }
    for (const auto& t : model.negative()) {
        if (t.intensity == 0.0)
            continue;
        jumps -= (t.intensity / t.rate) / (t.rate + 1.0);
    }
    return (r - q) - 0.5 * model.sigma2() - jumps;
}

HyperExpLevyModel assemble_model(const ExpMixtureFit& fit, const CgmyParams& params, double r,
                                 double q, const std::optional<DiffusionConfig>& diffusion)
{
    params.validate(true);
    auto density = build_two_sided_density(fit, params);
    const double sigma2 = diffusion ? small_jump_variance(params, density, *diffusion) : 0.0;
    HyperExpLevyModel model(density.positive, density.negative, sigma2, 0.0,
                            ModelProvenance{params, fit.id});
    return model.with_drift(risk_neutral_drift(model, r, q));
}

namespace {

nlohmann::json terms_to_json(const std::vector<ExpTerm>& terms)
{
    auto arr = nlohmann::json::array();
    for (const auto& t : terms)
        arr.push_back({t.intensity, t.rate});
    return arr;
}

std::vector<ExpTerm> terms_from_json(const nlohmann::json& arr, const char* key)
{
    if (!arr.is_array())
        throw ConfigError(fmt::format("model field '{}' must be an array of [intensity, rate] pairs", key));
    std::vector<ExpTerm> terms;
    for (const auto& pair : arr) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw ConfigError(fmt::format("model field '{}' has a malformed term", key));
        terms.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    return terms;
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const char* where)
{
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

double required_number(const nlohmann::json& obj, const char* key, const char* where)
{
    if (!obj.contains(key) || !obj.at(key).is_number())
        throw ConfigError(fmt::format("{} needs numeric field '{}'", where, key));
    return obj.at(key).get<double>();
}

} // namespace

nlohmann::json model_to_json(const HyperExpLevyModel& model)
{
    nlohmann::json doc;
    doc["pos_terms"] = terms_to_json(model.positive());
    doc["neg_terms"] = terms_to_json(model.negative());
    doc["sigma2"] = model.sigma2();
    doc["mu"] = model.mu();
    nlohmann::json prov = nlohmann::json::object();
    if (const auto& p = model.provenance().params)
        prov["cgmy"] = {{"C", p->C}, {"G", p->G}, {"M", p->M}, {"Y", p->Y}};
    prov["fit_id"] = model.provenance().fit_id;
    doc["provenance"] = prov;
    return doc;
}

HyperExpLevyModel model_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object())
        throw ConfigError("model document must be a JSON object");
    reject_unknown(doc, {"pos_terms", "neg_terms", "sigma2", "mu", "provenance"}, "model");
    if (!doc.contains("pos_terms") || !doc.contains("neg_terms"))
        throw ConfigError("model needs 'pos_terms' and 'neg_terms'");
    ModelProvenance provenance;
    if (doc.contains("provenance")) {
        const auto& prov = doc.at("provenance");
        reject_unknown(prov, {"cgmy", "fit_id"}, "model provenance");
        if (prov.contains("cgmy")) {
            const auto& c = prov.at("cgmy");
            reject_unknown(c, {"C", "G", "M", "Y"}, "model provenance cgmy");
            provenance.params = CgmyParams{required_number(c, "C", "cgmy"), required_number(c, "G", "cgmy"),
                                           required_number(c, "M", "cgmy"), required_number(c, "Y", "cgmy")};
        }
        if (prov.contains("fit_id"))
            provenance.fit_id = prov.at("fit_id").get<std::string>();
    }
    return HyperExpLevyModel(terms_from_json(doc.at("pos_terms"), "pos_terms"),
                             terms_from_json(doc.at("neg_terms"), "neg_terms"),
                             required_number(doc, "sigma2", "model"), required_number(doc, "mu", "model"),
                             std::move(provenance));
}

HyperExpLevyModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open model file '{}'", path));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("model file '{}' is not valid JSON: {}", path, e.what()));
    }
    return model_from_json(doc);
}

void save_model(const HyperExpLevyModel& model, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError(fmt::format("cannot write model file '{}'", path));
    out << model_to_json(model).dump(2) << '\n';
}

} // namespace edslevy

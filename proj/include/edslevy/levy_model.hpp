#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edslevy/hyperexp.hpp"

namespace edslevy {

using cplx = std::complex<double>;

/// Where a model came from; carried through serialisation so pricing runs can
/// be reproduced.
struct ModelProvenance {
    std::optional<CgmyParams> params;
    std::string fit_id;
};

/// Levy process with drift mu, Brownian variance sigma2 and jump density
///   k(x) = sum_i a_i e^{-alpha_i x} 1{x>0} + sum_j b_j e^{-beta_j |x|} 1{x<0}.
/// Immutable after construction.
class HyperExpLevyModel {
public:
    HyperExpLevyModel() = default;
    /// Throws ConfigError on negative intensities, non-positive or repeated
    /// rates, or negative sigma2.
    HyperExpLevyModel(std::vector<ExpTerm> positive, std::vector<ExpTerm> negative, double sigma2,
                      double mu, ModelProvenance provenance = {});

    const std::vector<ExpTerm>& positive() const { return positive_; }
    const std::vector<ExpTerm>& negative() const { return negative_; }
    double sigma2() const { return sigma2_; }
    double mu() const { return mu_; }
    const ModelProvenance& provenance() const { return provenance_; }

    /// lambda_+ = sum a_i / alpha_i, lambda_- = sum b_j / beta_j.
    double lambda_plus() const;
    double lambda_minus() const;
    /// pi_i^+ = a_i / (lambda_+ alpha_i); empty when lambda_+ = 0.
    std::vector<double> pi_plus() const;
    std::vector<double> pi_minus() const;

    /// kappa(s) = log E[e^{s X_1}]. Throws NumericalError when s sits on a pole
    /// alpha_i or -beta_j of an active term.
    cplx exponent(cplx s) const;
    cplx exponent_derivative(cplx s) const;

    /// Model of -X: term lists swapped, drift negated.
    HyperExpLevyModel reflected() const;
    HyperExpLevyModel with_drift(double mu) const;
    HyperExpLevyModel with_sigma2(double sigma2) const;

    /// Smallest alpha and beta among terms with positive intensity
    /// (+inf when a side has none).
    double min_positive_rate() const;
    double min_negative_rate() const;

    friend bool operator==(const HyperExpLevyModel&, const HyperExpLevyModel&);

private:
    std::vector<ExpTerm> positive_;
    std::vector<ExpTerm> negative_;
    double sigma2_ = 0.0;
    double mu_ = 0.0;
    ModelProvenance provenance_;
};

/// Free-function spelling of HyperExpLevyModel::exponent.
cplx characteristic_exponent(const HyperExpLevyModel& model, cplx s);
HyperExpLevyModel reflect(const HyperExpLevyModel& model);

/// Small-jump treatment. The residual between the CGMY density and the
/// mixture on (-cutoff, cutoff) is replaced by a Brownian motion whose
/// variance is the second moment of that residual.
struct DiffusionConfig {
    double cutoff = 0.25;
    double tolerance = 1e-14;
    unsigned max_depth = 30;
};

/// sigma^2 = int_{-eps}^{eps} x^2 ktilde(x) dx with
/// ktilde = (C e^{-Mx}/x^{1+Y} - k_+(x)) on (0, eps) and the mirrored G-side
/// term on (-eps, 0). The residual may change sign; only a negative total is
/// an error.
double small_jump_variance(const CgmyParams& params, const TwoSidedDensity& density,
                           const DiffusionConfig& cfg = {});

/// Positive- and negative-side halves of small_jump_variance.
std::pair<double, double> small_jump_variance_sides(const CgmyParams& params,
                                                     const TwoSidedDensity& density,
                                                     const DiffusionConfig& cfg = {});

/// mu with kappa(1) = r - q, for a model whose own drift is ignored.
/// Throws NumericalError if some active alpha_i <= 1.
double risk_neutral_drift(const HyperExpLevyModel& model, double r, double q);

/// Mixture -> density -> optional sigma^2 -> risk-neutral drift.
HyperExpLevyModel assemble_model(const ExpMixtureFit& fit, const CgmyParams& params, double r,
                                 double q, const std::optional<DiffusionConfig>& diffusion);

nlohmann::json model_to_json(const HyperExpLevyModel& model);
/// Throws ConfigError on missing or unknown fields.
HyperExpLevyModel model_from_json(const nlohmann::json& doc);
HyperExpLevyModel load_model(const std::string& path);
void save_model(const HyperExpLevyModel& model, const std::string& path);

} // namespace edslevy

#pragma once

#include <string>
#include <vector>

#include "edslevy/levy_model.hpp"
#include "edslevy/polynomial.hpp"

namespace edslevy {

struct RootOptions {
    /// |kappa(rho) - a| <= residual_tol * (1 + |a|) after polishing.
    double residual_tol = 1e-10;
    /// A root next to a pole of kappa cannot meet residual_tol in double
    /// precision; it is also accepted once the Newton correction is below
    /// step_tol * (1 + |rho|).
    double step_tol = 1e-12;
    /// Roots closer than distinct_tol * max(1, max|rho|) count as repeated.
    double distinct_tol = 1e-10;
    /// |Re rho| below guard_band * max(1, max|rho|) cannot be classified.
    double guard_band = 1e-12;
    int max_newton = 60;
};

/// Wiener-Hopf factor of the running supremum at an independent exp(a) time:
///   phi_a^+(s) = prod_j (1 - s/alpha_j) / prod_i (1 - s/rho_i)
///              = atom + sum_i A_i (-rho_i)/(s - rho_i).
struct WienerHopfFactor {
    cplx a;
    std::vector<cplx> rho;            ///< roots of kappa(s) = a with Re > 0
    std::vector<cplx> coeffs;         ///< A_i^+
    cplx atom;                        ///< P(M_{e(a)} = 0)
    std::vector<double> phase_rates;  ///< alpha_j of the active positive terms

    /// Product form.
    cplx evaluate(cplx s) const;
    /// Partial-fraction form.
    cplx evaluate_partial_fractions(cplx s) const;
    /// P(M_{e(a)} > x) = sum_i A_i e^{-rho_i x}.
    cplx supremum_tail(double x) const;
};

/// Transforms of the first-passage time T_x over a level x > 0.
struct PassageTransform {
    cplx distribution; ///< int e^{-at} P(T_x < t) dt = (1/a) sum A_i e^{-rho_i x}
    cplx density;      ///< E[e^{-a T_x}] = sum A_i e^{-rho_i x}
};

/// Root finding for kappa(s) = a with the a-independent polynomial data built
/// once. kappa = p/q with q(s) = prod(alpha_i - s) prod(beta_j + s) over active
/// terms; the roots are those of p - a q. Const member functions are safe to
/// call concurrently.
class WienerHopfSolver {
public:
    explicit WienerHopfSolver(HyperExpLevyModel model, RootOptions options = {});

    const HyperExpLevyModel& model() const { return model_; }
    const Polynomial& numerator() const { return p_; }
    const Polynomial& denominator() const { return q_; }
    /// n+m+2 (sigma > 0), n+m+1 (sigma = 0, mu != 0) or n+m, over active terms.
    int expected_degree() const;
    /// n+1 when sigma > 0 or (sigma = 0, mu > 0); n otherwise.
    int expected_positive_roots() const;

    std::vector<cplx> roots(cplx a) const;
    /// Newton from `guess` (e.g. the roots at a nearby argument); falls back
    /// to the eigenvalue solve unless that gives a full set of distinct roots.
    std::vector<cplx> roots(cplx a, const std::vector<cplx>& guess) const;
    WienerHopfFactor factor(cplx a) const;
    /// Classification and coefficients from a complete root set.
    WienerHopfFactor factor_from_roots(cplx a, const std::vector<cplx>& all) const;
    PassageTransform passage(double x, cplx a) const;
    static PassageTransform passage(double x, const WienerHopfFactor& f);

private:
    Polynomial target(cplx a) const;
    /// Polishes in place; returns a description of the first failure, or
    /// an empty string.
    std::string polish_all(cplx a, std::vector<cplx>& roots) const;

    HyperExpLevyModel model_;
    RootOptions options_;
    std::vector<double> alphas_;
    std::vector<double> betas_;
    Polynomial p_;
    Polynomial q_;
};

/// All roots of kappa(s) = a, Newton-polished.
std::vector<cplx> kappa_roots(const HyperExpLevyModel& model, cplx a, const RootOptions& options = {});

/// Requires Re(a) > 0.
WienerHopfFactor wh_plus_factor(const HyperExpLevyModel& model, cplx a, const RootOptions& options = {});

/// Up-crossing of level x > 0. Requires Re(a) > 0.
PassageTransform first_passage_transform(const HyperExpLevyModel& model, double x, cplx a);

/// Down-crossing of the fraction b in (0, 1) of the initial price, i.e. the
/// up-crossing of -ln b by the reflected process.
PassageTransform down_crossing_transform(const HyperExpLevyModel& model, double barrier, cplx a);

} // namespace edslevy

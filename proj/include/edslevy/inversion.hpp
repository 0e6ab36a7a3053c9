#pragma once

#include <functional>
#include <vector>

#include "edslevy/levy_model.hpp"

namespace edslevy {

/// Euler-summation inversion (alternating Bromwich series with binomial
/// averaging). The discretisation error is about e^{-A}.
struct EulerInversionParams {
    double A = 18.4;
    int n_terms = 38;
    int m_euler = 11;

    void validate() const;
};

/// Abscissae s_k = (A + 2k pi i)/(2t), k = 0..n+m, and real weights c_k such
/// that the Euler estimate equals sum_k c_k Re F(s_k). The binomial average is
/// linear in the partial sums, so it folds into the weights.
struct EulerRule {
    std::vector<cplx> abscissae;
    std::vector<double> weights;
};
EulerRule euler_rule(double t, const EulerInversionParams& params);

using LaplaceTransform = std::function<cplx(cplx)>;

/// f(t) from its Laplace transform. Throws ConfigError for t <= 0 and
/// NumericalError if a partial sum is not finite.
double invert(const LaplaceTransform& transform, double t, const EulerInversionParams& params = {});

struct PassageCurveOptions {
    EulerInversionParams euler;
    /// Day probability pi_n = f_n/365 on the 360-day grid when true, f_n/360
    /// otherwise.
    bool daycount_365 = true;
    /// Survival increases up to this size are flattened by a running minimum;
    /// larger ones are an error.
    double repair_tolerance = 1e-6;
    unsigned threads = 0;
};

/// Survival and passage density of the down-crossing time of a barrier
/// fraction, on days 1..N with t_n = n/360.
struct FirstPassageCurve {
    double barrier = 0.0;
    std::vector<int> days;
    std::vector<double> times;
    std::vector<double> survival;        ///< Fbar_n, clamped to [0, 1], non-increasing
    std::vector<double> density;         ///< f_n >= 0, per year
    std::vector<double> day_probability; ///< pi_n
    int survival_repairs = 0;
    int density_clamps = 0;

    int last_day() const { return days.empty() ? 0 : days.back(); }
    /// Survival on day n (1 <= n <= last_day); day 0 is 1.
    double survival_on(int day) const;
    double probability_on(int day) const;
};

FirstPassageCurve passage_curve(const HyperExpLevyModel& model, double barrier, int days,
                                const PassageCurveOptions& options = {});

} // namespace edslevy

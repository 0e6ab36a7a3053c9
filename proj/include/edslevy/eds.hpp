#pragma once

#include <istream>
#include <string>
#include <vector>

#include "edslevy/inversion.hpp"

namespace edslevy {

/// Coupons per year on the 360-day grid.
enum class CouponFrequency { annual = 1, semiannual = 2, quarterly = 4, monthly = 12 };

CouponFrequency parse_coupon_frequency(const std::string& name);
std::string to_string(CouponFrequency frequency);

/// Coupon days 360/f, 2*360/f, ... up to `days`; a short final period ending
/// on `days` is appended when maturity is not on the regular grid.
std::vector<int> coupon_schedule(int days, CouponFrequency frequency);

struct EdsContract {
    double notional = 1.0;
    double recovery = 0.5;
    double barrier = 0.3;
    double maturity_years = 5.0;
    std::vector<int> coupon_days; ///< np_1 < ... < np_NP <= N; np_0 = 0 implied

    /// N = round(360 T).
    int days() const;
    /// Throws ConfigError on recovery outside [0, 1), barrier outside (0, 1),
    /// non-positive maturity or a malformed schedule.
    void validate() const;

    static EdsContract standard(double maturity_years, double barrier, double recovery,
                                CouponFrequency frequency, double notional = 1.0);
};

/// Discount factors B_n on days 1..N (B_0 = 1).
class DiscountCurve {
public:
    /// B_n = exp(-r n/360).
    static DiscountCurve flat(double rate, int days);
    /// Piecewise-constant forward curve through the (day, discount) knots of a
    /// CSV with header `day,discount`: log-linear between knots, flat forward
    /// beyond the last. Throws ConfigError on malformed input.
    static DiscountCurve from_csv(std::istream& in, int days, bool allow_increasing = false);
    static DiscountCurve from_csv_file(const std::string& path, int days, bool allow_increasing = false);
    static DiscountCurve from_factors(std::vector<double> factors, bool allow_increasing = false);

    int days() const { return static_cast<int>(factors_.size()); }
    /// B_n for 0 <= n <= days().
    double factor(int day) const;
    const std::vector<double>& factors() const { return factors_; }

private:
    std::vector<double> factors_; ///< B_1..B_N
};

/// zeta(n) = n - max{np_j <= n}, with np_0 = 0.
int accrual_days(int day, const std::vector<int>& schedule);

struct EdsQuote {
    double rate = 0.0;    ///< k_T, annual
    double rate_bp = 0.0; ///< k_T in basis points
    double survival_at_maturity = 0.0;
    double protection_leg = 0.0; ///< (1-R) sum B_n pi_n
    double premium_annuity = 0.0; ///< sum (np_j - np_{j-1})/360 B Fbar
    double accrual_annuity = 0.0; ///< sum (n - zeta(n))/360 B_n pi_n
};

/// Swap rate that zeroes the expected contract value:
///   k_T = (1-R) sum B_n pi_n / [sum_j (np_j - np_{j-1})/360 B_{np_j} Fbar_{np_j}
///                               + sum_n (n - zeta(n))/360 B_n pi_n].
EdsQuote eds_rate(const EdsContract& contract, const DiscountCurve& curve, const FirstPassageCurve& passage);

/// E[V(T)] for a given annual rate, summed term by term from the receipt and
/// payment legs.
double expected_swap_value(const EdsContract& contract, const DiscountCurve& curve,
                           const FirstPassageCurve& passage, double rate);

} // namespace edslevy

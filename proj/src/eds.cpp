#include "edslevy/eds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace edslevy {

CouponFrequency parse_coupon_frequency(const std::string& name)
{
    if (name == "annual")
        return CouponFrequency::annual;
    if (name == "semiannual")
        return CouponFrequency::semiannual;
    if (name == "quarterly")
        return CouponFrequency::quarterly;
    if (name == "monthly")
        return CouponFrequency::monthly;
    throw ConfigError(fmt::format("unknown coupon frequency '{}' (annual, semiannual, quarterly, monthly)", name));
}

std::string to_string(CouponFrequency frequency)
{
    switch (frequency) {
    case CouponFrequency::annual: return "annual";
    case CouponFrequency::semiannual: return "semiannual";
    case CouponFrequency::quarterly: return "quarterly";
    case CouponFrequency::monthly: return "monthly";
    }
    return "unknown";
}

std::vector<int> coupon_schedule(int days, CouponFrequency frequency)
{
    if (days < 1)
        throw ConfigError(fmt::format("coupon schedule needs a positive day count, got {}", days));
    const int step = 360 / static_cast<int>(frequency);
    std::vector<int> schedule;
    for (int d = step; d <= days; d += step)
        schedule.push_back(d);
    if (schedule.empty() || schedule.back() != days)
        schedule.push_back(days);
    return schedule;
}

int EdsContract::days() const { return static_cast<int>(std::lround(360.0 * maturity_years)); }

void EdsContract::validate() const
{
    if (!(notional > 0.0))
        throw ConfigError(fmt::format("notional must be positive, got {}", notional));
    if (!(recovery >= 0.0 && recovery <= 1.0))
        throw ConfigError(fmt::format("recovery must lie in [0, 1], got {}", recovery));
    if (!(barrier > 0.0 && barrier < 1.0))
        throw ConfigError(fmt::format("barrier must lie in (0, 1), got {}", barrier));
    if (!(maturity_years > 0.0) || days() < 1)
        throw ConfigError(fmt::format("maturity must be at least one day, got {} years", maturity_years));
    if (coupon_days.empty())
        throw ConfigError("contract has no coupon dates");
    int previous = 0;
    for (int d : coupon_days) {
        if (d <= previous)
            throw ConfigError("coupon days must be strictly increasing and positive");
        previous = d;
    }
    if (previous > days())
        throw ConfigError(fmt::format("coupon day {} is after maturity day {}", previous, days()));
}

EdsContract EdsContract::standard(double maturity_years, double barrier, double recovery,
                                  CouponFrequency frequency, double notional)
{
    EdsContract c;
    c.notional = notional;
    c.recovery = recovery;
    c.barrier = barrier;
    c.maturity_years = maturity_years;
    c.coupon_days = coupon_schedule(c.days(), frequency);
    c.validate();
    return c;
}

DiscountCurve DiscountCurve::flat(double rate, int days)
{
    if (!std::isfinite(rate))
        throw ConfigError("discount rate must be finite");
    if (days < 1)
        throw ConfigError(fmt::format("discount curve needs a positive day count, got {}", days));
    std::vector<double> f(static_cast<std::size_t>(days));
    for (int n = 1; n <= days; ++n)
        f[static_cast<std::size_t>(n - 1)] = std::exp(-rate * n / 360.0);
    return from_factors(std::move(f), rate < 0.0);
}

DiscountCurve DiscountCurve::from_factors(std::vector<double> factors, bool allow_increasing)
{
    double previous = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const double b = factors[i];
        if (!(b > 0.0) || (!allow_increasing && b > 1.0))
            throw ConfigError(fmt::format("discount factor on day {} out of range: {}", i + 1, b));
        if (!allow_increasing && b > previous)
            throw ConfigError(fmt::format("discount factors increase on day {}", i + 1));
        previous = b;
    }
    DiscountCurve curve;
    curve.factors_ = std::move(factors);
    return curve;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_field(const std::string& text, int line, const char* what)
{
    T value{};
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(fmt::format("curve CSV line {}: cannot parse {} '{}'", line, what, text));
    return value;
}

} // namespace

DiscountCurve DiscountCurve::from_csv(std::istream& in, int days, bool allow_increasing)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != "day,discount")
        throw ConfigError("curve CSV must start with the header 'day,discount'");
    std::vector<std::pair<int, double>> knots{{0, 1.0}};
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ConfigError(fmt::format("curve CSV line {}: expected 'day,discount'", line_no));
        const int day = parse_field<int>(trim(line.substr(0, comma)), line_no, "day");
        const double b = parse_field<double>(trim(line.substr(comma + 1)), line_no, "discount");
        if (day <= knots.back().first)
            throw ConfigError(fmt::format("curve CSV line {}: days must be strictly increasing and positive", line_no));
        if (!(b > 0.0))
            throw ConfigError(fmt::format("curve CSV line {}: discount factor must be positive", line_no));
        knots.emplace_back(day, b);
    }
    if (knots.size() < 2)
        throw ConfigError("curve CSV has no data rows");
    if (days < 1)
        throw ConfigError(fmt::format("discount curve needs a positive day count, got {}", days));

    std::vector<double> f(static_cast<std::size_t>(days));
    std::size_t k = 1;
    for (int n = 1; n <= days; ++n) {
        while (k + 1 < knots.size() && knots[k].first < n)
            ++k;
        const auto [d0, b0] = knots[k - 1];
        const auto [d1, b1] = knots[k];
        // Constant forward between knots, and the last forward beyond them.
        const double fwd = std::log(b0 / b1) / (d1 - d0);
        f[static_cast<std::size_t>(n - 1)] = (n <= d1 ? b0 : b1) * std::exp(-fwd * (n - (n <= d1 ? d0 : d1)));
    }
    return from_factors(std::move(f), allow_increasing);
}

DiscountCurve DiscountCurve::from_csv_file(const std::string& path, int days, bool allow_increasing)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open curve CSV '{}'", path));
    return from_csv(in, days, allow_increasing);
}

double DiscountCurve::factor(int day) const
{
    if (day == 0)
        return 1.0;
    if (day < 0 || day > days())
        throw ConfigError(fmt::format("discount factor requested for day {} outside 0..{}", day, days()));
    return factors_[static_cast<std::size_t>(day - 1)];
}

int accrual_days(int day, const std::vector<int>& schedule)
{
    if (day < 1)
        throw ConfigError(fmt::format("accrual requested for day {}", day));
    const auto it = std::upper_bound(schedule.begin(), schedule.end(), day);
    const int last = it == schedule.begin() ? 0 : *std::prev(it);
    return day - last;
}

namespace {

void check_inputs(const EdsContract& contract, const DiscountCurve& curve, const FirstPassageCurve& passage)
{
    contract.validate();
    const int n = contract.days();
    if (passage.last_day() < n)
        throw ConfigError(fmt::format("passage curve covers {} days, contract needs {}", passage.last_day(), n));
    if (curve.days() < n)
        throw ConfigError(fmt::format("discount curve covers {} days, contract needs {}", curve.days(), n));
}

} // namespace

EdsQuote eds_rate(const EdsContract& contract, const DiscountCurve& curve, const FirstPassageCurve& passage)
{
    check_inputs(contract, curve, passage);
    const int days = contract.days();
    EdsQuote q;

    double protection = 0.0, accrual = 0.0;
    for (int n = 1; n <= days; ++n) {
        const double weight = curve.factor(n) * passage.probability_on(n);
        protection += weight;
        accrual += (n - accrual_days(n, contract.coupon_days)) / 360.0 * weight;
    }
    double premium = 0.0;
    int previous = 0;
    for (int d : contract.coupon_days) {
        premium += (d - previous) / 360.0 * curve.factor(d) * passage.survival_on(d);
        previous = d;
    }

    q.protection_leg = (1.0 - contract.recovery) * protection;
    q.premium_annuity = premium;
    q.accrual_annuity = accrual;
    q.survival_at_maturity = passage.survival_on(days);
    const double denominator = premium + accrual;
    if (!(denominator > 0.0))
        throw NumericalError(fmt::format("EDS rate denominator is {}; the contract is degenerate", denominator));
    q.rate = q.protection_leg / denominator;
    q.rate_bp = 1e4 * q.rate;
    return q;
}

double expected_swap_value(const EdsContract& contract, const DiscountCurve& curve,
                           const FirstPassageCurve& passage, double rate)
{
    check_inputs(contract, curve, passage);
    const double m = contract.notional;
    double receipts = 0.0;
    for (int n = 1; n <= contract.days(); ++n) {
        const double accrued = m * rate * (n - accrual_days(n, contract.coupon_days)) / 360.0;
        receipts += (m * (1.0 - contract.recovery) - accrued) * curve.factor(n) * passage.probability_on(n);
    }
    double payments = 0.0;
    int previous = 0;
    for (int d : contract.coupon_days) {
        payments += m * rate * (d - previous) / 360.0 * curve.factor(d) * passage.survival_on(d);
        previous = d;
    }
    return receipts - payments;
}

} // namespace edslevy

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "edslevy/monte_carlo.hpp"
#include "edslevy/wiener_hopf.hpp"

#include "../support/oracles.hpp"

using namespace edslevy;

namespace {

HyperExpLevyModel stylized(bool diffusion = true)
{
    return assemble_model(reference_mixture(), CgmyParams{0.5, 2.0, 10.0, 0.5}, 0.05, 0.0,
                          diffusion ? std::optional<DiffusionConfig>(DiffusionConfig{}) : std::nullopt);
}

double kappa_real(const HyperExpLevyModel& m, double s) { return oracle::exponent(m, s).real(); }

// Root of kappa(s) = a on (lo, hi) by bisection; kappa - a changes sign there.
double bisect(const HyperExpLevyModel& m, double a, double lo, double hi)
{
    const double f_lo = kappa_real(m, lo) - a;
    for (int i = 0; i < 300 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((kappa_real(m, mid) - a > 0.0) == (f_lo > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Positive real roots: one in (0, alpha_1), one between consecutive alphas,
// and one above the last alpha when kappa grows without bound there.
std::vector<double> positive_roots_by_bisection(const HyperExpLevyModel& m, double a)
{
    std::vector<double> alphas;
    for (const auto& t : m.positive())
        alphas.push_back(t.rate);
    std::sort(alphas.begin(), alphas.end());
    std::vector<double> roots;
    double lo = 0.0;
    for (double alpha : alphas) {
        roots.push_back(bisect(m, a, lo + 1e-13 * std::max(1.0, lo), alpha * (1.0 - 1e-13)));
        lo = alpha;
    }
    if (m.sigma2() > 0.0 || m.mu() > 0.0) {
        double hi = 2.0 * std::max(1.0, lo);
        while (kappa_real(m, hi) < a)
            hi *= 2.0;
        roots.push_back(bisect(m, a, lo * (1.0 + 1e-13), hi));
    }
    return roots;
}

// Negative real roots, mirrored through the reflected model.
std::vector<double> negative_roots_by_bisection(const HyperExpLevyModel& m, double a)
{
    auto mirrored = positive_roots_by_bisection(m.reflected(), a);
    for (double& r : mirrored)
        r = -r;
    std::sort(mirrored.begin(), mirrored.end());
    return mirrored;
}

std::vector<double> sorted_real_parts(const std::vector<cplx>& roots)
{
    std::vector<double> out;
    for (const auto& r : roots)
        out.push_back(r.real());
    std::sort(out.begin(), out.end());
    return out;
}

bool same_root_set(std::vector<cplx> a, std::vector<cplx> b, double tol)
{
    if (a.size() != b.size())
        return false;
    for (const auto& r : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx x, cplx y) { return std::abs(x - r) < std::abs(y - r); });
        if (std::abs(*it - r) > tol * std::max(1.0, std::abs(r)))
            return false;
        b.erase(it);
    }
    return true;
}

} // namespace

TEST(WienerHopf, RealArgumentRootsInterlaceThePoles)
{
    for (bool diffusion : {true, false}) {
        const auto m = stylized(diffusion);
        const WienerHopfSolver solver(m);
        for (double a : {0.01, 0.7, 25.0, 3000.0}) {
            const auto f = solver.factor(a);
            for (const auto& r : f.rho)
                EXPECT_LT(std::abs(r.imag()), 1e-9 * std::abs(r));
            const auto expected = positive_roots_by_bisection(m, a);
            const auto got = sorted_real_parts(f.rho);
            ASSERT_EQ(got.size(), expected.size()) << "a = " << a;
            for (std::size_t i = 0; i < got.size(); ++i)
                EXPECT_NEAR(got[i], expected[i], 1e-9 * std::max(1.0, expected[i])) << "a = " << a << " i = " << i;
        }
    }
}

TEST(WienerHopf, RootCountsAndResiduals)
{
    const auto m = stylized();
    const WienerHopfSolver solver(m);
    EXPECT_EQ(solver.expected_degree(), 16);
    EXPECT_EQ(solver.expected_positive_roots(), 8);
    const cplx a(4.0, -120.0);
    const auto roots = solver.roots(a);
    ASSERT_EQ(static_cast<int>(roots.size()), 16);
    for (const auto& r : roots)
        EXPECT_LT(std::abs(oracle::exponent(m, r) - a), 1e-8 * (1.0 + std::abs(a)));
    EXPECT_EQ(solver.factor(a).rho.size(), 8u);

    const WienerHopfSolver pure_jump(stylized(false));
    EXPECT_EQ(pure_jump.expected_degree(), 15);
}

TEST(WienerHopf, FactorIsAProbabilityAtZero)
{
    const auto with_sigma = stylized();
    const auto no_sigma = stylized(false);
    const auto negative_drift = no_sigma.with_drift(-0.3);
    const auto positive_drift = no_sigma.with_drift(0.3);
    for (const auto* m : {&with_sigma, &no_sigma, &negative_drift, &positive_drift})
        for (cplx a : {cplx(0.3, 0.0), cplx(2.0, 15.0), cplx(50.0, -4000.0)}) {
            const auto f = wh_plus_factor(*m, a);
            cplx total = f.atom;
            for (const auto& c : f.coeffs)
                total += c;
            EXPECT_NEAR(std::abs(total - 1.0), 0.0, 1e-9);
            EXPECT_NEAR(std::abs(f.evaluate(0.0) - 1.0), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(f.supremum_tail(0.0) - (1.0 - f.atom)), 0.0, 1e-9);
        }
    // Without diffusion the supremum has an atom at zero exactly when the drift is non-positive.
    EXPECT_GT(wh_plus_factor(negative_drift, 1.0).atom.real(), 0.0);
    EXPECT_NEAR(std::abs(wh_plus_factor(positive_drift, 1.0).atom), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(wh_plus_factor(with_sigma, 1.0).atom), 0.0, 1e-12);
}

TEST(WienerHopf, FactorisationIdentity)
{
    const auto m = stylized();
    for (cplx a : {cplx(1.0, 0.0), cplx(3.0, 40.0)}) {
        const auto plus = wh_plus_factor(m, a);
        const auto minus = wh_plus_factor(reflect(m), a);
        for (cplx s : {cplx(0.0, 1.0), cplx(0.5, -3.0), cplx(-0.4, 7.0)}) {
            const cplx lhs = a / (a - oracle::exponent(m, s));
            const cplx rhs = plus.evaluate(s) * minus.evaluate(-s);
            EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-9 * std::abs(lhs));
            EXPECT_NEAR(std::abs(plus.evaluate(s) - plus.evaluate_partial_fractions(s)), 0.0, 1e-9);
        }
    }
}

TEST(WienerHopf, BrownianPassageMatchesClosedForm)
{
    for (double mu : {-0.2, 0.0, 0.15})
        for (double sigma2 : {0.01, 0.09}) {
            const HyperExpLevyModel m({}, {}, sigma2, mu);
            for (cplx a : {cplx(0.05, 0.0), cplx(1.0, 30.0), cplx(40.0, -900.0)}) {
                const auto up = first_passage_transform(m, 0.4, a);
                const cplx expected = oracle::brownian_passage_laplace(mu, sigma2, 0.4, a);
                EXPECT_NEAR(std::abs(up.density - expected), 0.0, 1e-11);
                EXPECT_NEAR(std::abs(up.distribution - expected / a), 0.0, 1e-11 / std::abs(a));
                const auto down = down_crossing_transform(m, 0.5, a);
                const cplx mirrored = oracle::brownian_passage_laplace(-mu, sigma2, -std::log(0.5), a);
                EXPECT_NEAR(std::abs(down.density - mirrored), 0.0, 1e-11);
            }
        }
}

TEST(WienerHopf, WarmStartAgreesWithColdStart)
{
    const WienerHopfSolver solver(stylized());
    const cplx a0(2.0, 100.0);
    const auto previous = solver.roots(a0);
    for (cplx a : {cplx(2.0, 110.0), cplx(2.5, 90.0), a0}) {
        const auto warm = solver.roots(a, previous);
        const auto cold = solver.roots(a);
        EXPECT_TRUE(same_root_set(warm, cold, 1e-10)) << "a = " << a;
        const auto f = solver.factor_from_roots(a, warm);
        const auto g = solver.factor(a);
        EXPECT_NEAR(std::abs(WienerHopfSolver::passage(0.3, f).density - solver.passage(0.3, a).density), 0.0,
                    1e-12);
        EXPECT_NEAR(std::abs(f.atom - g.atom), 0.0, 1e-12);
    }
    // A useless guess still yields the right roots.
    EXPECT_TRUE(same_root_set(solver.roots(a0, std::vector<cplx>(3, cplx(1.0))), previous, 1e-10));
}

TEST(WienerHopf, InvalidArguments)
{
    const auto m = stylized();
    EXPECT_THROW(wh_plus_factor(m, 0.0), ConfigError);
    EXPECT_THROW(wh_plus_factor(m, cplx(-1.0, 5.0)), ConfigError);
    EXPECT_THROW(first_passage_transform(m, 0.0, 1.0), ConfigError);
    EXPECT_THROW(first_passage_transform(m, -0.3, 1.0), ConfigError);
    EXPECT_THROW(down_crossing_transform(m, 1.0, 1.0), ConfigError);
    EXPECT_THROW(down_crossing_transform(m, 0.0, 1.0), ConfigError);
}

TEST(WienerHopf, PassageTransformIsDecreasingInLevelAndArgument)
{
    const auto m = stylized();
    double previous = 1.0;
    for (double x : {0.05, 0.2, 0.5, 1.0}) {
        const double v = first_passage_transform(m, x, 0.5).density.real();
        EXPECT_LT(v, previous);
        EXPECT_GT(v, 0.0);
        previous = v;
    }
    EXPECT_LT(down_crossing_transform(m, 0.3, 2.0).density.real(), down_crossing_transform(m, 0.3, 0.5).density.real());
}

TEST(WienerHopf, FullRootSetAtUnitArgument)
{
    const auto m = stylized();
    auto expected = positive_roots_by_bisection(m, 1.0);
    const auto negative = negative_roots_by_bisection(m, 1.0);
    expected.insert(expected.end(), negative.begin(), negative.end());
    std::sort(expected.begin(), expected.end());
    const auto got = sorted_real_parts(kappa_roots(m, 1.0));
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        EXPECT_NEAR(got[i], expected[i], 1e-9 * std::max(1.0, std::abs(expected[i])));
}

TEST(WienerHopf, BrownianRootsAndFactor)
{
    const double mu = 0.07, sigma2 = 0.09;
    const HyperExpLevyModel m({}, {}, sigma2, mu);
    const cplx a(0.8, 3.0);
    const cplx disc = std::sqrt(mu * mu + 2.0 * sigma2 * a);
    const std::vector<cplx> expected{(-mu + disc) / sigma2, (-mu - disc) / sigma2};
    EXPECT_TRUE(same_root_set(kappa_roots(m, a), expected, 1e-12));

    const auto f = wh_plus_factor(m, a);
    ASSERT_EQ(f.rho.size(), 1u);
    ASSERT_EQ(f.coeffs.size(), 1u);
    EXPECT_NEAR(std::abs(f.coeffs[0] - 1.0), 0.0, 1e-12);
    for (cplx s : {cplx(0.3, 1.0), cplx(-2.0, 0.5)})
        EXPECT_NEAR(std::abs(f.evaluate(s) - f.rho[0] / (f.rho[0] - s)), 0.0, 1e-12);
}

TEST(WienerHopf, SinglePhasePartialFractions)
{
    // One positive phase, no diffusion, positive drift: two positive roots.
    const double alpha = 4.0;
    const HyperExpLevyModel m({{3.0, alpha}}, {{2.0, 6.0}}, 0.0, 0.2);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (cplx a : {cplx(1.0, 0.0), cplx(0.5, 7.0)}) {
        const auto f = wh_plus_factor(m, a);
        ASSERT_EQ(f.rho.size(), 2u);
        for (int i = 0; i < 20; ++i) {
            const cplx s(u(rng), u(rng));
            const cplx direct = (1.0 - s / alpha) / ((1.0 - s / f.rho[0]) * (1.0 - s / f.rho[1]));
            EXPECT_NEAR(std::abs(f.evaluate_partial_fractions(s) - direct), 0.0, 1e-10 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST(WienerHopf, PassageLimitsInTheLevel)
{
    const auto m = stylized();
    EXPECT_NEAR(std::abs(first_passage_transform(m, 1e-12, cplx(1.0, 2.0)).density - 1.0), 0.0, 1e-9);
    EXPECT_LT(std::abs(first_passage_transform(m, 50.0, 1.0).density), 1e-12);
}

TEST(WienerHopf, DownCrossingIsTheReflectedUpCrossing)
{
    const auto m = stylized();
    for (cplx a : {cplx(1.0, 0.0), cplx(2.0, -30.0)}) {
        const auto down = down_crossing_transform(m, 0.3, a);
        const auto up = first_passage_transform(reflect(m), std::log(10.0 / 3.0), a);
        EXPECT_NEAR(std::abs(down.density - up.density), 0.0, 1e-13);
    }
    // Symmetric model without drift: both directions agree.
    const HyperExpLevyModel sym({{1.0, 5.0}, {0.4, 9.0}}, {{1.0, 5.0}, {0.4, 9.0}}, 0.02, 0.0);
    const cplx a(0.7, 4.0);
    EXPECT_NEAR(std::abs(down_crossing_transform(sym, 0.5, a).density -
                         first_passage_transform(sym, std::log(2.0), a).density), 0.0, 1e-12);
}

TEST(WienerHopf, LaplaceTransformAgreesWithSimulation)
{
    // E[e^{-T} 1{T < inf}] from simulated passage times; horizons past 12
    // years contribute less than e^{-12}.
    const auto m = stylized();
    const double expected = down_crossing_transform(m, 0.3, 1.0).density.real();
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.dt = 1.0 / 360.0;
    cfg.seed = 2024;
    const auto tau = simulate_passage_times(m, 0.3, 12.0, cfg);
    std::vector<double> discounted(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i)
        discounted[i] = std::isfinite(tau[i]) ? std::exp(-tau[i]) : 0.0;
    const auto est = summarize(discounted);
    EXPECT_NEAR(est.mean, expected, 3.0 * est.standard_error) << "SE " << est.standard_error;
}

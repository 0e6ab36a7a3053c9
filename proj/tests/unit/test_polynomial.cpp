#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "edslevy/errors.hpp"
#include "edslevy/polynomial.hpp"

using namespace edslevy;
using cplx = std::complex<double>;

namespace {

Polynomial from_roots(const std::vector<cplx>& roots, cplx lead = 1.0)
{
    Polynomial p{lead};
    for (const auto& r : roots)
        p = p * Polynomial::linear(-r, 1.0);
    return p;
}

// Every expected root has a computed root within tol.
void expect_roots(const std::vector<cplx>& computed, const std::vector<cplx>& expected, double tol)
{
    ASSERT_EQ(computed.size(), expected.size());
    for (const auto& e : expected) {
        const auto nearest = std::min_element(computed.begin(), computed.end(), [&](cplx a, cplx b) {
            return std::abs(a - e) < std::abs(b - e);
        });
        EXPECT_LT(std::abs(*nearest - e), tol) << "root " << e;
    }
}

} // namespace

TEST(Polynomial, Arithmetic)
{
    const Polynomial p{1.0, 2.0};      // 1 + 2s
    const Polynomial q{0.0, 0.0, 3.0}; // 3 s^2
    const auto prod = p * q;
    EXPECT_EQ(prod.degree(), 3);
    EXPECT_EQ(prod(2.0), cplx(5.0 * 12.0));
    EXPECT_EQ((p + q)(1.0), cplx(6.0));
    EXPECT_EQ((p - p).degree(), -1);
    EXPECT_EQ((cplx(2.0) * p)(1.0), cplx(6.0));
}

TEST(Polynomial, RootsOfKnownFactors)
{
    const std::vector<cplx> roots{1.0, -2.0, cplx(0.5, 3.0), cplx(0.5, -3.0), 7.5};
    expect_roots(polynomial_roots(from_roots(roots, cplx(2.0, -1.0))), roots, 1e-10);
}

TEST(Polynomial, WidelySpreadRoots)
{
    // Scales like the Wiener-Hopf case: poles near 2..14 and a pair near +-900.
    const std::vector<cplx> roots{2.1, 2.6, 3.3, -10.2, -11.5, cplx(880.0, 840.0), cplx(-870.0, -840.0)};
    const auto computed = polynomial_roots(from_roots(roots));
    expect_roots(computed, roots, 1e-6);
}

TEST(Polynomial, RandomRootsRoundTrip)
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> roots;
        for (int i = 0; i < 8; ++i)
            roots.emplace_back(u(rng), u(rng));
        expect_roots(polynomial_roots(from_roots(roots)), roots, 1e-8);
    }
}

TEST(Polynomial, Degenerate)
{
    EXPECT_TRUE(polynomial_roots(Polynomial{3.0}).empty());
    EXPECT_THROW(polynomial_roots(Polynomial{0.0, 0.0}), NumericalError);
    const auto r = polynomial_roots(Polynomial{-4.0, 2.0});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(std::abs(r[0] - 2.0), 0.0, 1e-15);
}

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "edslevy/levy_model.hpp"

#include "../support/oracles.hpp"

using namespace edslevy;

namespace {

HyperExpLevyModel small_model()
{
    return HyperExpLevyModel({{1.2, 3.0}, {0.4, 7.5}}, {{0.9, 2.0}, {2.0, 5.0}, {0.3, 11.0}}, 0.04, -0.1);
}

HyperExpLevyModel stylized(const std::optional<DiffusionConfig>& d = DiffusionConfig{})
{
    return assemble_model(reference_mixture(), CgmyParams{0.5, 2.0, 10.0, 0.5}, 0.05, 0.0, d);
}

} // namespace

TEST(LevyModel, ExponentMatchesExtendedPrecisionSum)
{
    const auto m = small_model();
    for (cplx s : {cplx(0.5, 0.0), cplx(-1.5, 2.0), cplx(2.9, -0.3), cplx(0.0, 40.0), cplx(-4.0, -7.0)}) {
        const cplx expected = oracle::exponent(m, s);
        EXPECT_NEAR(std::abs(m.exponent(s) - expected), 0.0, 1e-13 * std::max(1.0, std::abs(expected)));
    }
    EXPECT_EQ(m.exponent(0.0), cplx(0.0));
    EXPECT_EQ(characteristic_exponent(m, 0.7), m.exponent(0.7));
}

TEST(LevyModel, DerivativeMatchesCentralDifference)
{
    const auto m = small_model();
    for (cplx s : {cplx(0.5, 0.3), cplx(-1.0, 2.0)}) {
        const double h = 1e-5;
        const cplx fd = (m.exponent(s + h) - m.exponent(s - h)) / (2.0 * h);
        EXPECT_NEAR(std::abs(m.exponent_derivative(s) - fd), 0.0, 1e-7);
    }
}

TEST(LevyModel, ReflectionIsAnInvolutionAndMirrorsTheExponent)
{
    const auto m = stylized();
    const auto r = reflect(m);
    EXPECT_EQ(r.reflected(), m);
    EXPECT_EQ(r.mu(), -m.mu());
    EXPECT_EQ(r.provenance().params->G, 10.0);
    EXPECT_EQ(r.provenance().params->M, 2.0);
    for (cplx s : {cplx(0.5, 1.0), cplx(-0.7, -3.0)})
        EXPECT_NEAR(std::abs(r.exponent(s) - m.exponent(-s)), 0.0, 1e-13);
}

TEST(LevyModel, PhaseProbabilities)
{
    const auto m = small_model();
    EXPECT_NEAR(m.lambda_plus(), 1.2 / 3.0 + 0.4 / 7.5, 1e-15);
    double total = 0.0;
    for (double p : m.pi_minus())
        total += p;
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_TRUE(HyperExpLevyModel({}, {}, 0.1, 0.0).pi_plus().empty());
    EXPECT_EQ(m.min_positive_rate(), 3.0);
    EXPECT_EQ(m.min_negative_rate(), 2.0);
}

TEST(LevyModel, PoleAndConstructionErrors)
{
    const auto m = small_model();
    EXPECT_THROW(m.exponent(3.0), NumericalError);
    EXPECT_THROW(m.exponent(-5.0), NumericalError);
    EXPECT_THROW(HyperExpLevyModel({{-1.0, 2.0}}, {}, 0.0, 0.0), ConfigError);
    EXPECT_THROW(HyperExpLevyModel({{1.0, 2.0}, {1.0, 2.0}}, {}, 0.0, 0.0), ConfigError);
    EXPECT_THROW(HyperExpLevyModel({{1.0, 0.0}}, {}, 0.0, 0.0), ConfigError);
    EXPECT_THROW(HyperExpLevyModel({}, {}, -0.1, 0.0), ConfigError);
}

TEST(SmallJumpVariance, ClosedFormPerSide)
{
    const CgmyParams p{0.5, 2.0, 10.0, 0.5};
    const auto density = build_two_sided_density(reference_mixture(), p);
    for (double eps : {0.1, 0.25, 0.5}) {
        const auto [up, down] = small_jump_variance_sides(p, density, DiffusionConfig{eps});
        const double up_ref = oracle::cgmy_second_moment(p.C, p.M, p.Y, eps) -
                              oracle::mixture_second_moment(density.positive, eps);
        const double down_ref = oracle::cgmy_second_moment(p.C, p.G, p.Y, eps) -
                                oracle::mixture_second_moment(density.negative, eps);
        EXPECT_NEAR(up, up_ref, 1e-13);
        EXPECT_NEAR(down, down_ref, 1e-13);
    }
}

TEST(SmallJumpVariance, MidpointOracle)
{
    const CgmyParams p{0.6506, 1.9458, 11.0187, 0.5};
    const auto density = build_two_sided_density(reference_mixture(), p);
    auto residual = [&](double x) {
        double mix_up = 0.0, mix_down = 0.0;
        for (const auto& t : density.positive)
            mix_up += t.intensity * std::exp(-t.rate * x);
        for (const auto& t : density.negative)
            mix_down += t.intensity * std::exp(-t.rate * x);
        return x * x * (cgmy_density(p, x) - mix_up + cgmy_density(p, -x) - mix_down);
    };
    EXPECT_NEAR(small_jump_variance(p, density), oracle::midpoint_v4(residual, 0.25), 1e-10);
}

TEST(SmallJumpVariance, ZeroIntensityGivesZero)
{
    const CgmyParams p{0.0, 2.0, 10.0, 0.5};
    EXPECT_EQ(small_jump_variance(p, build_two_sided_density(reference_mixture(), p)), 0.0);
}

TEST(SmallJumpVariance, OvershootingMixtureIsAnError)
{
    const auto mixture = make_mixture(0.5, {0.01, 0.02}, MixtureLayout{1e5});
    const CgmyParams p{0.5, 2.0, 10.0, 0.5};
    EXPECT_THROW(small_jump_variance(p, build_two_sided_density(mixture, p)), NumericalError);
    EXPECT_THROW(small_jump_variance(p, build_two_sided_density(reference_mixture(), p), DiffusionConfig{-1.0}),
                 ConfigError);
}

TEST(Assembly, RiskNeutralDrift)
{
    for (auto p : {CgmyParams{0.5, 2.0, 10.0, 0.5}, CgmyParams{0.2171, 1.0084, 5.8031, 0.5}})
        for (double r : {0.0, 0.03, 0.08})
            for (double q : {0.0, 0.02}) {
                const auto m = assemble_model(reference_mixture(), p, r, q, DiffusionConfig{});
                EXPECT_NEAR(oracle::exponent(m, 1.0).real(), r - q, 1e-12);
                EXPECT_GT(m.sigma2(), 0.0);
            }
    EXPECT_EQ(stylized(std::nullopt).sigma2(), 0.0);
    EXPECT_EQ(stylized().provenance().fit_id, "reference-y0.5");
}

TEST(Assembly, DriftNeedsRatesAboveOne)
{
    const HyperExpLevyModel m({{1.0, 0.8}}, {{1.0, 3.0}}, 0.0, 0.0);
    EXPECT_THROW(risk_neutral_drift(m, 0.05, 0.0), NumericalError);
    EXPECT_THROW(assemble_model(reference_mixture(), CgmyParams{0.5, 2.0, 0.9, 0.5}, 0.05, 0.0, std::nullopt),
                 ConfigError);
}

TEST(Serialisation, JsonRoundTrip)
{
    const auto m = stylized();
    const auto back = model_from_json(model_to_json(m));
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.provenance().fit_id, m.provenance().fit_id);
    EXPECT_EQ(back.provenance().params->M, 10.0);

    const auto path = (std::filesystem::temp_directory_path() / "edslevy_model_roundtrip.json").string();
    save_model(m, path);
    EXPECT_EQ(load_model(path), m);
    std::remove(path.c_str());
}

TEST(Serialisation, RejectsUnknownAndMissingFields)
{
    auto doc = model_to_json(small_model());
    doc["extra"] = 1;
    EXPECT_THROW(model_from_json(doc), ConfigError);
    doc = model_to_json(small_model());
    doc.erase("mu");
    EXPECT_THROW(model_from_json(doc), ConfigError);
    doc = model_to_json(small_model());
    doc["pos_terms"] = nlohmann::json::array({nlohmann::json::array({1.0})});
    EXPECT_THROW(model_from_json(doc), ConfigError);
    EXPECT_THROW(load_model("/nonexistent/model.json"), ConfigError);
}

TEST(SmallJumpVariance, SymmetricSidesAgree)
{
    const CgmyParams p{0.5, 6.0, 6.0, 0.5};
    const auto [up, down] = small_jump_variance_sides(p, build_two_sided_density(reference_mixture(), p));
    EXPECT_EQ(up, down);
}

TEST(Assembly, DriftWithoutJumps)
{
    EXPECT_DOUBLE_EQ(risk_neutral_drift(HyperExpLevyModel({}, {}, 0.0, 0.0), 0.05, 0.0), 0.05);
    EXPECT_DOUBLE_EQ(risk_neutral_drift(HyperExpLevyModel({{0.0, 3.0}}, {{0.0, 2.0}}, 0.0, 0.0), 0.05, 0.0), 0.05);
    EXPECT_DOUBLE_EQ(risk_neutral_drift(HyperExpLevyModel({}, {}, 0.02, 0.0), 0.05, 0.0), 0.04);
}

TEST(LevyModel, RealOnTheRealStrip)
{
    const auto m = stylized();
    const double lo = -m.min_negative_rate(), hi = m.min_positive_rate();
    for (int i = 1; i < 20; ++i) {
        const double s = lo + (hi - lo) * i / 20.0;
        EXPECT_EQ(m.exponent(s).imag(), 0.0);
    }
    EXPECT_NEAR(std::abs(m.exponent(0.5) - oracle::exponent(m, 0.5)), 0.0, 1e-15);
}

TEST(LevyModel, ReflectionSwapsTheRates)
{
    const auto m = stylized();
    const auto r = reflect(m);
    const auto& u = reference_mixture().rates;
    ASSERT_EQ(r.positive().size(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_DOUBLE_EQ(r.positive()[i].rate, 2.0 + u[i]);
        EXPECT_DOUBLE_EQ(r.negative()[i].rate, 10.0 + u[i]);
    }
    EXPECT_NEAR(std::abs(r.exponent(1.0) - m.exponent(-1.0)), 0.0, 1e-15);
}

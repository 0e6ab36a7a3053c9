#include "edslevy/wiener_hopf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace edslevy {

namespace {

std::vector<double> active_rates(const std::vector<ExpTerm>& terms)
{
    std::vector<double> rates;
    for (const auto& t : terms)
        if (t.intensity > 0.0)
            rates.push_back(t.rate);
    return rates;
}

std::string format_complex(cplx z) { return fmt::format("({:.6g}{:+.6g}i)", z.real(), z.imag()); }

// Roots of kappa(s) = a may sit within 1e-6 of a pole, where kappa is too
// ill-conditioned for Newton and the companion eigenvalues are only accurate
// to about the pole distance. Polishing uses g(s) = (kappa(s) - a) * w(s),
// w = alpha - s or beta + s for the pole nearest the iterate: same root, no
// singularity.
struct PoleSplit {
    cplx g;
    cplx dg;
};

PoleSplit pole_free(const HyperExpLevyModel& m, cplx a, cplx s, int side, std::size_t index)
{
    cplx rest = m.mu() * s + 0.5 * m.sigma2() * s * s - a;
    cplx drest = m.mu() + m.sigma2() * s;
    double c = 0.0, pole = 0.0;
    const auto& pos = m.positive();
    const auto& neg = m.negative();
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (pos[i].intensity == 0.0)
            continue;
        const double alpha = pos[i].rate, ci = pos[i].intensity / alpha;
        if (side > 0 && i == index) {
            c = ci;
            pole = alpha;
            continue;
        }
        const cplx w = alpha - s;
        rest += ci * s / w;
        drest += ci * alpha / (w * w);
    }
    for (std::size_t j = 0; j < neg.size(); ++j) {
        if (neg[j].intensity == 0.0)
            continue;
        const double beta = neg[j].rate, cj = neg[j].intensity / beta;
        if (side < 0 && j == index) {
            c = cj;
            pole = beta;
            continue;
        }
        const cplx w = beta + s;
        rest -= cj * s / w;
        drest -= cj * beta / (w * w);
    }
    if (side > 0) {
        const cplx w = pole - s;
        return {w * rest + c * s, -rest + w * drest + c};
    }
    if (side < 0) {
        const cplx w = pole + s;
        return {w * rest - c * s, rest + w * drest - c};
    }
    return {rest, drest};
}

cplx polish_root(const HyperExpLevyModel& m, cplx a, cplx r, int max_newton, double& correction)
{
    auto nearest_pole = [&](cplx s, int& side, std::size_t& index) {
        double best = std::numeric_limits<double>::infinity();
        side = 0;
        for (std::size_t i = 0; i < m.positive().size(); ++i)
            if (m.positive()[i].intensity > 0.0 && std::abs(s - m.positive()[i].rate) < best) {
                best = std::abs(s - m.positive()[i].rate);
                side = 1;
                index = i;
            }
        for (std::size_t j = 0; j < m.negative().size(); ++j)
            if (m.negative()[j].intensity > 0.0 && std::abs(s + m.negative()[j].rate) < best) {
                best = std::abs(s + m.negative()[j].rate);
                side = -1;
                index = j;
            }
    };

    correction = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_newton; ++it) {
        int side = 0;
        std::size_t index = 0;
        nearest_pole(r, side, index);
        const auto here = pole_free(m, a, r, side, index);
        const cplx step = here.g / here.dg;
        correction = std::abs(step);
        if (!std::isfinite(correction))
            break;
        if (correction <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(r)))
            break;
        // Halve while |g| does not decrease, measured against the same pole.
        cplx candidate = r - step;
        double scale = 1.0;
        for (int halve = 0; halve < 30 && !(std::abs(pole_free(m, a, candidate, side, index).g) < std::abs(here.g));
             ++halve) {
            scale *= 0.5;
            candidate = r - scale * step;
        }
        if (!(std::abs(pole_free(m, a, candidate, side, index).g) < std::abs(here.g)))
            break;
        r = candidate;
    }
    return r;
}

} // namespace

cplx WienerHopfFactor::evaluate(cplx s) const
{
    cplx num = 1.0, den = 1.0;
    for (double alpha : phase_rates)
        num *= 1.0 - s / alpha;
    for (const auto& r : rho)
        den *= 1.0 - s / r;
    return num / den;
}

cplx WienerHopfFactor::evaluate_partial_fractions(cplx s) const
{
    cplx sum = atom;
    for (std::size_t i = 0; i < rho.size(); ++i)
        sum += coeffs[i] * (-rho[i]) / (s - rho[i]);
    return sum;
}

cplx WienerHopfFactor::supremum_tail(double x) const
{
    cplx sum = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        sum += coeffs[i] * std::exp(-rho[i] * x);
    return sum;
}

WienerHopfSolver::WienerHopfSolver(HyperExpLevyModel model, RootOptions options)
    : model_(std::move(model)), options_(options), alphas_(active_rates(model_.positive())),
      betas_(active_rates(model_.negative()))
{
    // q(s) = prod (alpha_i - s) prod (beta_j + s)
    q_ = Polynomial{1.0};
    for (double alpha : alphas_)
        q_ = q_ * Polynomial::linear(alpha, -1.0);
    for (double beta : betas_)
        q_ = q_ * Polynomial::linear(beta, 1.0);

    // p(s) = q(s) kappa(s): the Brownian and drift part times q plus
    //   (a_i/alpha_i) s q(s)/(alpha_i - s) - (b_j/beta_j) s q(s)/(beta_j + s).
    p_ = q_ * Polynomial{0.0, model_.mu(), 0.5 * model_.sigma2()};
    const Polynomial s_poly{0.0, 1.0};
    for (const auto& t : model_.positive()) {
        if (t.intensity == 0.0)
            continue;
        Polynomial rest{t.intensity / t.rate};
        for (double alpha : alphas_)
            if (alpha != t.rate)
                rest = rest * Polynomial::linear(alpha, -1.0);
        for (double beta : betas_)
            rest = rest * Polynomial::linear(beta, 1.0);
        p_ += s_poly * rest;
    }
    for (const auto& t : model_.negative()) {
        if (t.intensity == 0.0)
            continue;
        Polynomial rest{-t.intensity / t.rate};
        for (double alpha : alphas_)
            rest = rest * Polynomial::linear(alpha, -1.0);
        for (double beta : betas_)
            if (beta != t.rate)
                rest = rest * Polynomial::linear(beta, 1.0);
        p_ += s_poly * rest;
    }
}

int WienerHopfSolver::expected_degree() const
{
    const int poles = static_cast<int>(alphas_.size() + betas_.size());
    if (model_.sigma2() > 0.0)
        return poles + 2;
    if (model_.mu() != 0.0)
        return poles + 1;
    return poles;
}

int WienerHopfSolver::expected_positive_roots() const
{
    const int n = static_cast<int>(alphas_.size());
    if (model_.sigma2() > 0.0 || model_.mu() > 0.0)
        return n + 1;
    return n;
}

Polynomial WienerHopfSolver::target(cplx a) const
{
    Polynomial t = p_ - a * q_;
    if (t.degree() != expected_degree())
        throw NumericalError(fmt::format("p - a q has degree {} where {} was expected (a = {})", t.degree(),
                                         expected_degree(), format_complex(a)));
    return t;
}

std::string WienerHopfSolver::polish_all(cplx a, std::vector<cplx>& roots) const
{
    const double tol = options_.residual_tol * (1.0 + std::abs(a));
    for (auto& r : roots) {
        double correction = 0.0;
        r = polish_root(model_, a, r, options_.max_newton, correction);
        const double residual = std::abs(model_.exponent(r) - a);
        if (!(residual <= tol) && !(correction <= options_.step_tol * (1.0 + std::abs(r))))
            return fmt::format("root {} of kappa(s) = {} has residual {:.3g}", format_complex(r),
                               format_complex(a), residual);
    }
    double scale = 1.0;
    for (const auto& r : roots)
        scale = std::max(scale, std::abs(r));
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(roots[i] - roots[j]) < options_.distinct_tol * scale)
                return fmt::format("kappa(s) = {} has a repeated root near {}", format_complex(a),
                                   format_complex(roots[i]));
    return {};
}

std::vector<cplx> WienerHopfSolver::roots(cplx a) const
{
    auto roots = polynomial_roots(target(a));
    if (const auto problem = polish_all(a, roots); !problem.empty())
        throw NumericalError(problem);
    return roots;
}

std::vector<cplx> WienerHopfSolver::roots(cplx a, const std::vector<cplx>& guess) const
{
    if (static_cast<int>(guess.size()) == expected_degree()) {
        // deg(p - a q) distinct roots are all of them, so a warm start that
        // polishes to a distinct set needs no eigenvalue solve.
        auto roots = guess;
        if (polish_all(a, roots).empty())
            return roots;
    }
    return this->roots(a);
}

WienerHopfFactor WienerHopfSolver::factor(cplx a) const
{
    if (!(a.real() > 0.0))
        throw ConfigError(fmt::format("Wiener-Hopf factor needs Re(a) > 0, got {}", format_complex(a)));
    return factor_from_roots(a, roots(a));
}

WienerHopfFactor WienerHopfSolver::factor_from_roots(cplx a, const std::vector<cplx>& all) const
{
    if (!(a.real() > 0.0))
        throw ConfigError(fmt::format("Wiener-Hopf factor needs Re(a) > 0, got {}", format_complex(a)));
    double scale = 1.0;
    for (const auto& r : all)
        scale = std::max(scale, std::abs(r));

    WienerHopfFactor f;
    f.a = a;
    f.phase_rates = alphas_;
    for (const auto& r : all) {
        if (std::abs(r.real()) < options_.guard_band * scale)
            throw NumericalError(fmt::format("root {} of kappa(s) = {} lies on the imaginary axis",
                                             format_complex(r), format_complex(a)));
        if (r.real() > 0.0)
            f.rho.push_back(r);
    }
    if (static_cast<int>(f.rho.size()) != expected_positive_roots())
        throw NumericalError(fmt::format("kappa(s) = {} has {} roots in the right half-plane, expected {}",
                                         format_complex(a), f.rho.size(), expected_positive_roots()));
    std::sort(f.rho.begin(), f.rho.end(), [](cplx x, cplx y) {
        return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    });

    for (std::size_t i = 0; i < f.rho.size(); ++i) {
        cplx num = 1.0, den = 1.0;
        for (double alpha : alphas_)
            num *= 1.0 - f.rho[i] / alpha;
        for (std::size_t j = 0; j < f.rho.size(); ++j)
            if (j != i)
                den *= 1.0 - f.rho[i] / f.rho[j];
        f.coeffs.push_back(num / den);
    }

    if (f.rho.size() == alphas_.size()) {
        // No upward creeping: P(M_{e(a)} = 0) = prod rho_i / alpha_i.
        f.atom = 1.0;
        for (std::size_t i = 0; i < f.rho.size(); ++i)
            f.atom *= f.rho[i] / alphas_[i];
    } else {
        f.atom = 0.0;
    }
#ifndef NDEBUG
    cplx total = f.atom;
    for (const auto& c : f.coeffs)
        total += c;
    if (std::abs(total - 1.0) > 1e-8)
        throw NumericalError(fmt::format("Wiener-Hopf coefficients sum to {} at a = {}", format_complex(total),
                                         format_complex(a)));
#endif
    return f;
}

PassageTransform WienerHopfSolver::passage(double x, cplx a) const
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw ConfigError(fmt::format("passage level must be positive, got {}", x));
    return passage(x, factor(a));
}

PassageTransform WienerHopfSolver::passage(double x, const WienerHopfFactor& f)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw ConfigError(fmt::format("passage level must be positive, got {}", x));
    const cplx tail = f.supremum_tail(x);
    return {tail / f.a, tail};
}

std::vector<cplx> kappa_roots(const HyperExpLevyModel& model, cplx a, const RootOptions& options)
{
    return WienerHopfSolver(model, options).roots(a);
}

WienerHopfFactor wh_plus_factor(const HyperExpLevyModel& model, cplx a, const RootOptions& options)
{
    return WienerHopfSolver(model, options).factor(a);
}

PassageTransform first_passage_transform(const HyperExpLevyModel& model, double x, cplx a)
{
    return WienerHopfSolver(model).passage(x, a);
}

PassageTransform down_crossing_transform(const HyperExpLevyModel& model, double barrier, cplx a)
{
    if (!(barrier > 0.0 && barrier < 1.0))
        throw ConfigError(fmt::format("down-crossing barrier must lie in (0, 1), got {}", barrier));
    return WienerHopfSolver(model.reflected()).passage(-std::log(barrier), a);
}

} // namespace edslevy

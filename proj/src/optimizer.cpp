#include "edslevy/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace edslevy {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

class Simplex {
public:
    Simplex(const Objective& f, int budget) : f_(f), budget_(budget) {}

    double eval(const std::vector<double>& x)
    {
        ++evaluations_;
        double v = f_(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }

    bool exhausted() const { return evaluations_ >= budget_; }
    int evaluations() const { return evaluations_; }

    // One Nelder-Mead descent from `start`; returns the best vertex.
    Vertex run(const std::vector<double>& start, double step, double f_tol, double x_tol,
               int& iterations, bool& converged)
    {
        const std::size_t n = start.size();
        const double nd = static_cast<double>(n);
        const double reflect = 1.0;
        const double expand = 1.0 + 2.0 / nd;
        const double contract = 0.75 - 1.0 / (2.0 * nd);
        const double shrink = 1.0 - 1.0 / nd;

        std::vector<Vertex> simplex;
        simplex.reserve(n + 1);
        simplex.push_back({start, eval(start)});
        for (std::size_t i = 0; i < n; ++i) {
            auto x = start;
            x[i] += (x[i] != 0.0 ? step * std::max(1.0, std::abs(x[i])) : step);
            simplex.push_back({x, eval(x)});
        }

        converged = false;
        std::vector<double> centroid(n), trial(n);
        auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

        while (!exhausted()) {
            std::sort(simplex.begin(), simplex.end(), by_value);
            ++iterations;

            const double f_best = simplex.front().f;
            const double f_worst = simplex.back().f;
            double x_spread = 0.0;
            for (std::size_t v = 1; v <= n; ++v)
                for (std::size_t i = 0; i < n; ++i)
                    x_spread = std::max(x_spread, std::abs(simplex[v].x[i] - simplex[0].x[i]));
            if (std::isfinite(f_worst) &&
                std::abs(f_worst - f_best) <= f_tol * (std::abs(f_best) + f_tol) &&
                x_spread <= x_tol) {
                converged = true;
                break;
            }
            if (x_spread <= 1e-3 * x_tol) {
                // Degenerate simplex; a restart rebuilds it.
                converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t i = 0; i < n; ++i)
                    centroid[i] += simplex[v].x[i] / nd;

            auto along = [&](double coef) {
                for (std::size_t i = 0; i < n; ++i)
                    trial[i] = centroid[i] + coef * (centroid[i] - simplex[n].x[i]);
                return trial;
            };

            auto xr = along(reflect);
            const double fr = eval(xr);
            if (fr < simplex[0].f) {
                auto xe = along(reflect * expand);
                const double fe = eval(xe);
                simplex[n] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
                continue;
            }
            if (fr < simplex[n - 1].f) {
                simplex[n] = {xr, fr};
                continue;
            }
            const bool outside = fr < simplex[n].f;
            auto xc = along(outside ? reflect * contract : -contract);
            const double fc = eval(xc);
            if (fc < std::min(fr, simplex[n].f)) {
                simplex[n] = {xc, fc};
                continue;
            }
            for (std::size_t v = 1; v <= n; ++v) {
                for (std::size_t i = 0; i < n; ++i)
                    simplex[v].x[i] = simplex[0].x[i] + shrink * (simplex[v].x[i] - simplex[0].x[i]);
                simplex[v].f = eval(simplex[v].x);
            }
        }
        return *std::min_element(simplex.begin(), simplex.end(), by_value);
    }

private:
    const Objective& f_;
    int budget_;
    int evaluations_ = 0;
};

} // namespace

SimplexResult minimize_simplex(const Objective& f, std::vector<double> start,
                               const SimplexOptions& options)
{
    Simplex simplex(f, options.max_evaluations);
    SimplexResult result;
    result.x = std::move(start);
    result.value = simplex.eval(result.x);

    double step = options.initial_step;
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        bool converged = false;
        Vertex best = simplex.run(result.x, step, options.f_tol, options.x_tol,
                                  result.iterations, converged);
        const double previous = result.value;
        if (best.f <= result.value) {
            result.x = best.x;
            result.value = best.f;
        }
        result.converged = converged;
        if (!converged)
            break;
        const double gain = previous - result.value;
        if (restart > 0 && gain <= options.f_tol * (std::abs(result.value) + options.f_tol))
            break;
        // Restarts use progressively smaller simplices around the incumbent.
        step = std::max(options.x_tol * 10.0, step * 0.5);
    }
    result.evaluations = simplex.evaluations();
    return result;
}

} // namespace edslevy

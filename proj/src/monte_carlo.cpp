#include "edslevy/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "edslevy/parallel.hpp"

namespace edslevy {

void SimConfig::validate() const
{
    if (paths < 1)
        throw ConfigError("Monte Carlo needs at least one path");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError(fmt::format("Monte Carlo step must be positive, got {}", dt));
    if (partitions < 1)
        throw ConfigError("Monte Carlo needs at least one partition");
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

using Engine = std::mt19937_64;

Engine partition_engine(std::uint64_t seed, unsigned partition)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), partition};
    return Engine(seq);
}

std::size_t partition_size(const SimConfig& cfg, unsigned p)
{
    return cfg.paths / cfg.partitions + (p < cfg.paths % cfg.partitions ? 1 : 0);
}

// Jump arrivals and sizes for one side of the density.
class JumpSide {
public:
    explicit JumpSide(const std::vector<ExpTerm>& terms)
    {
        std::vector<double> probs;
        for (const auto& t : terms) {
            if (t.intensity > 0.0) {
                lambda_ += t.intensity / t.rate;
                rates_.push_back(t.rate);
                probs.push_back(t.intensity / t.rate);
            }
        }
        if (!probs.empty())
            pick_ = std::discrete_distribution<std::size_t>(probs.begin(), probs.end());
    }

    double lambda() const { return lambda_; }

    double next_arrival(double now, Engine& rng)
    {
        if (lambda_ <= 0.0)
            return inf;
        return now + std::exponential_distribution<double>(lambda_)(rng);
    }

    double size(Engine& rng)
    {
        const double rate = rates_[pick_(rng)];
        return std::exponential_distribution<double>(rate)(rng);
    }

private:
    double lambda_ = 0.0;
    std::vector<double> rates_;
    std::discrete_distribution<std::size_t> pick_;
};

// First time the path is seen at or below `level` (inf if not by `horizon`).
double passage_time(double mu, double sigma, double level, double horizon, const SimConfig& cfg,
                    JumpSide& up, JumpSide& down, Engine& rng)
{
    boost::random::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const double s2 = sigma * sigma;

    double x = 0.0;
    double t = 0.0;
    double next_up = up.next_arrival(0.0, rng);
    double next_down = down.next_arrival(0.0, rng);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9));

    for (std::size_t k = 0; k < steps; ++k) {
        const double grid_end = std::min((k + 1) * cfg.dt, horizon);
        while (true) {
            const double event = std::min(next_up, next_down);
            const double b = std::min(event, grid_end);
            const double h = b - t;
            if (h > 0.0) {
                double next = x + mu * h;
                if (sigma > 0.0)
                    next += sigma * std::sqrt(h) * normal(rng);
                if (next <= level)
                    return b;
                if (cfg.bridge && sigma > 0.0) {
                    const double arg = 2.0 * (x - level) * (next - level) / (s2 * h);
                    if (arg < 50.0 && uniform(rng) < std::exp(-arg))
                        return b;
                }
                x = next;
                t = b;
            }
            if (event > grid_end)
                break;
            if (next_up <= next_down) {
                x += up.size(rng);
                next_up = up.next_arrival(next_up, rng);
            } else {
                x -= down.size(rng);
                next_down = down.next_arrival(next_down, rng);
                if (x <= level)
                    return b;
            }
        }
    }
    return inf;
}

} // namespace

std::vector<double> simulate_passage_times(const HyperExpLevyModel& model, double barrier, double horizon,
                                           const SimConfig& cfg)
{
    cfg.validate();
    if (!(barrier > 0.0 && barrier < 1.0))
        throw ConfigError(fmt::format("barrier must lie in (0, 1), got {}", barrier));
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError(fmt::format("horizon must be positive, got {}", horizon));
    const double level = std::log(barrier);
    const double sigma = std::sqrt(model.sigma2());

    std::vector<double> out(cfg.paths);
    std::vector<std::size_t> offset(cfg.partitions + 1, 0);
    for (unsigned p = 0; p < cfg.partitions; ++p)
        offset[p + 1] = offset[p] + partition_size(cfg, p);

    parallel_for(cfg.partitions, [&](std::size_t p) {
        auto rng = partition_engine(cfg.seed, static_cast<unsigned>(p));
        JumpSide up(model.positive());
        JumpSide down(model.negative());
        for (std::size_t i = offset[p]; i < offset[p + 1]; ++i)
            out[i] = passage_time(model.mu(), sigma, level, horizon, cfg, up, down, rng);
    }, cfg.threads);
    return out;
}

std::vector<McEstimate> simulate_passage(const HyperExpLevyModel& model, double barrier,
                                         const std::vector<double>& horizons, const SimConfig& cfg)
{
    for (double h : horizons)
        if (!(h > 0.0) || !std::isfinite(h))
            throw ConfigError(fmt::format("horizon must be positive, got {}", h));
    if (horizons.empty()) {
        cfg.validate();
        return {};
    }
    const double horizon = *std::max_element(horizons.begin(), horizons.end());
    const auto tau = simulate_passage_times(model, barrier, horizon, cfg);

    std::vector<McEstimate> out(horizons.size());
    const double n = static_cast<double>(cfg.paths);
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        const double limit = horizons[h] * (1.0 + 1e-12);
        const auto count = std::count_if(tau.begin(), tau.end(), [&](double t) { return t <= limit; });
        const double p = static_cast<double>(count) / n;
        out[h] = {p, std::sqrt(p * (1.0 - p) / n), cfg.paths};
    }
    return out;
}

McEstimate simulate_passage(const HyperExpLevyModel& model, double barrier, double horizon, const SimConfig& cfg)
{
    return simulate_passage(model, barrier, std::vector<double>{horizon}, cfg).front();
}

std::vector<double> simulate_terminal(const HyperExpLevyModel& model, double horizon, const SimConfig& cfg)
{
    cfg.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError(fmt::format("horizon must be positive, got {}", horizon));
    const double sd = std::sqrt(model.sigma2() * horizon);
    const double drift = model.mu() * horizon;

    std::vector<double> out(cfg.paths);
    std::vector<std::size_t> offset(cfg.partitions + 1, 0);
    for (unsigned p = 0; p < cfg.partitions; ++p)
        offset[p + 1] = offset[p] + partition_size(cfg, p);

    parallel_for(cfg.partitions, [&](std::size_t p) {
        auto rng = partition_engine(cfg.seed, static_cast<unsigned>(p));
        JumpSide up(model.positive());
        JumpSide down(model.negative());
        boost::random::normal_distribution<double> normal;
        std::poisson_distribution<long> n_up(std::max(up.lambda() * horizon, 1e-300));
        std::poisson_distribution<long> n_down(std::max(down.lambda() * horizon, 1e-300));
        for (std::size_t i = offset[p]; i < offset[p + 1]; ++i) {
            double x = drift + (sd > 0.0 ? sd * normal(rng) : 0.0);
            if (up.lambda() > 0.0)
                for (long j = n_up(rng); j > 0; --j)
                    x += up.size(rng);
            if (down.lambda() > 0.0)
                for (long j = n_down(rng); j > 0; --j)
                    x -= down.size(rng);
            out[i] = x;
        }
    }, cfg.threads);
    return out;
}

McEstimate summarize(const std::vector<double>& values)
{
    McEstimate e;
    e.paths = values.size();
    if (values.empty())
        return e;
    // Two-pass for the variance; the sample sizes here are large.
    double sum = 0.0;
    for (double v : values)
        sum += v;
    e.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - e.mean) * (v - e.mean);
    if (values.size() > 1)
        e.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    return e;
}

} // namespace edslevy

#include "spikedepth/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spikedepth/error.hpp"
#include "spikedepth/rng.hpp"

namespace spikedepth {

namespace {

// Sorted uniform times inside the open domain; redraws on boundary hits or ties.
std::vector<double> uniform_times(CounterRng& rng, const TimeDomain& domain, std::size_t k)
{
    std::vector<double> t(k);
    for (;;) {
        for (auto& x : t) {
            do {
                x = domain.start() + domain.length() * rng.uniform_open();
            } while (!domain.interior(x));
        }
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) == t.end()) return t;
    }
}

void check_bound(double rate, double bound)
{
    if (rate > bound * (1.0 + 1e-12))
        throw NumericalError("thinning bound violated: intensity exceeds its upper bound");
}

}  // namespace

TrainSample sample_hpp(double rate, TimeDomain domain, std::size_t n, std::uint64_t seed)
{
    require(std::isfinite(rate) && rate > 0.0, "HPP rate must be positive");
    require(n >= 1, "sample size must be at least 1");
    std::vector<SpikeTrain> trains;
    trains.reserve(n);
    const CounterRng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = root.substream(i);
        std::poisson_distribution<std::size_t> count(rate * domain.length());
        const std::size_t k = count(rng);
        trains.emplace_back(domain, uniform_times(rng, domain, k));
    }
    return TrainSample(std::move(trains));
}

TrainSample sample_ipp(const RateCurve& intensity, std::size_t n, std::uint64_t seed)
{
    require(n >= 1, "sample size must be at least 1");
    const TimeDomain& domain = intensity.domain();
    const double bound = intensity.max_rate();
    std::vector<SpikeTrain> trains;
    trains.reserve(n);
    const CounterRng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        if (bound <= 0.0) {
            trains.emplace_back(domain);
            continue;
        }
        auto rng = root.substream(i);
        std::poisson_distribution<std::size_t> count(bound * domain.length());
        const auto candidates = uniform_times(rng, domain, count(rng));
        std::vector<double> kept;
        for (double t : candidates) {
            const double r = intensity.rate(t);
            check_bound(r, bound);
            if (rng.uniform() * bound < r) kept.push_back(t);
        }
        trains.emplace_back(domain, std::move(kept));
    }
    return TrainSample(std::move(trains));
}

TrainSample sample_hawkes(const HawkesModel& model, TimeDomain domain, std::size_t n, std::uint64_t seed)
{
    require(n >= 1, "sample size must be at least 1");
    require(model.alpha >= 0.0 && model.beta > 0.0 && model.alpha < model.beta,
            "Hawkes model needs 0 <= alpha < beta");
    if (const auto* c = std::get_if<RateCurve>(&model.base))
        require(c->domain() == domain, "Hawkes base curve lives on another domain");

    auto base_at = [&](double t) {
        if (const auto* c = std::get_if<ConstantRate>(&model.base)) return c->rate;
        return std::get<RateCurve>(model.base).rate(t);
    };
    auto base_bound_from = [&](double t) {
        if (const auto* c = std::get_if<ConstantRate>(&model.base)) return c->rate;
        return std::get<RateCurve>(model.base).max_rate_from(t);
    };

    std::vector<SpikeTrain> trains;
    trains.reserve(n);
    const CounterRng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = root.substream(i);
        std::vector<double> events;
        double t = domain.start();
        double last = domain.start();
        double excite_at_last = 0.0;  // sum of alpha exp(-beta (last - t_i)) just after `last`
        for (;;) {
            const double excite = excite_at_last * std::exp(-model.beta * (t - last));
            const double bound = model.base_scale * base_bound_from(t) + excite;
            if (bound <= 0.0) break;
            t += rng.exponential() / bound;
            if (t >= domain.end()) break;
            const double lam =
                model.base_scale * base_at(t) + excite_at_last * std::exp(-model.beta * (t - last));
            check_bound(lam, bound);
            if (rng.uniform() * bound < lam) {
                if (!domain.interior(t) || (!events.empty() && t <= events.back())) continue;
                events.push_back(t);
                excite_at_last = excite_at_last * std::exp(-model.beta * (t - last)) + model.alpha;
                last = t;
            }
        }
        trains.emplace_back(domain, std::move(events));
    }
    return TrainSample(std::move(trains));
}

TrainSample sample_imi(const ImiGrid& model, std::size_t n, std::uint64_t seed)
{
    require(n >= 1, "sample size must be at least 1");
    const TimeDomain& domain = model.domain();
    const double bound = model.max_rate();
    std::vector<SpikeTrain> trains;
    trains.reserve(n);
    const CounterRng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> events;
        if (bound > 0.0) {
            auto rng = root.substream(i);
            double t = domain.start();
            double last = domain.start();
            for (;;) {
                t += rng.exponential() / bound;
                if (t >= domain.end()) break;
                const double lam = model.rate(t, t - last);
                check_bound(lam, bound);
                if (rng.uniform() * bound < lam && domain.interior(t) && t > last) {
                    events.push_back(t);
                    last = t;
                }
            }
        }
        trains.emplace_back(domain, std::move(events));
    }
    return TrainSample(std::move(trains));
}

namespace presets {

namespace {
constexpr double kBumpSd = 0.05;
const double kBumpHeight = 100.0 / std::sqrt(2.0 * std::numbers::pi);

double bump(double t, double centre)
{
    const double z = (t - centre) / kBumpSd;
    return kBumpHeight * std::exp(-0.5 * z * z);
}
}  // namespace

double sine_rate(double t)
{
    return std::max(0.0, 10.0 * std::sin(4.0 * std::numbers::pi * (t - 0.125)) + 10.0);
}

double parabola_rate(double t) { return 96.0 * (t - 0.5) * (t - 0.5); }

double bimodal_rate(double t) { return t <= 0.5 ? bump(t, 0.25) : bump(t, 0.75); }

double trimodal_rate(double t)
{
    if (t <= 0.25) return bump(t, 0.0);
    if (t <= 0.75) return bump(t, 0.5);
    return bump(t, 1.0);
}

RateCurve bimodal_curve() { return RateCurve::tabulate(TimeDomain(0.0, 1.0), bimodal_rate); }

HawkesModel bimodal_hawkes(double alpha, double beta)
{
    return HawkesModel{bimodal_curve(), 0.5, alpha, beta};
}

}  // namespace presets

}  // namespace spikedepth

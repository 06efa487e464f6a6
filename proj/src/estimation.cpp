#include "spikedepth/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "spikedepth/error.hpp"
#include "spikedepth/simulate.hpp"

namespace spikedepth {

namespace {

double quantile_sorted(const std::vector<double>& v, double p)
{
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Gaussian weights exp(-(m step / h)^2 / 2) / (h sqrt(2 pi)) for m = 0..cutoff.
std::vector<double> gaussian_weights(double step, double h)
{
    const auto cutoff = static_cast<std::size_t>(std::ceil(6.0 * h / step));
    std::vector<double> w(cutoff + 1);
    const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t m = 0; m <= cutoff; ++m) {
        const double z = static_cast<double>(m) * step / h;
        w[m] = norm * std::exp(-0.5 * z * z);
    }
    return w;
}

double trapezoid(std::span<const double> t, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

}  // namespace

double silverman_bandwidth(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = sd;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

RateCurve estimate_intensity_kernel(const TrainSample& sample, const KernelOptions& opts)
{
    const TimeDomain& domain = sample.domain();
    const double len = domain.length();
    require(opts.grid_points >= 2 && opts.bins >= 2, "kernel grids need at least two points");

    std::vector<double> pooled;
    pooled.reserve(sample.total_events());
    for (const auto& tr : sample) pooled.insert(pooled.end(), tr.times().begin(), tr.times().end());

    const double mean_count = sample.mean_cardinality();
    if (pooled.empty()) {
        const double flat = opts.floor_fraction / len;
        return RateCurve::tabulate(domain, [flat](double) { return flat; }, opts.grid_points);
    }

    const std::size_t nb = opts.bins;
    const double step = len / static_cast<double>(nb - 1);
    double h = opts.bandwidth > 0.0 ? opts.bandwidth : silverman_bandwidth(pooled);
    if (h <= 0.0)
        h = 0.9 * (len / std::sqrt(12.0)) * std::pow(static_cast<double>(pooled.size()), -0.2);
    h = std::max(h, 1.5 * step);

    // linear binning onto the bin nodes
    std::vector<double> counts(nb, 0.0);
    for (double x : pooled) {
        const double pos = std::clamp((x - domain.start()) / step, 0.0, static_cast<double>(nb - 1));
        const auto b = std::min(static_cast<std::size_t>(pos), nb - 2);
        const double w = pos - static_cast<double>(b);
        counts[b] += 1.0 - w;
        counts[b + 1] += w;
    }

    // convolution with the kernel and its mirror images about both edges
    const auto kern = gaussian_weights(step, h);
    const auto cutoff = static_cast<long>(kern.size() - 1);
    const long last = static_cast<long>(nb - 1);
    std::vector<double> dens(nb, 0.0);
    for (long g = 0; g <= last; ++g) {
        double s = 0.0;
        for (long b = std::max(0L, g - cutoff); b <= std::min(last, g + cutoff); ++b)
            s += counts[b] * kern[std::abs(g - b)];
        for (long b = 0; b <= std::min(last, cutoff - g); ++b) s += counts[b] * kern[g + b];
        for (long b = std::max(0L, 2 * last - g - cutoff); b <= last; ++b)
            s += counts[b] * kern[2 * last - g - b];
        dens[g] = s;
    }

    auto interp = [&](double t) {
        const double pos = std::clamp((t - domain.start()) / step, 0.0, static_cast<double>(last));
        const auto b = std::min(static_cast<std::size_t>(pos), nb - 2);
        const double w = pos - static_cast<double>(b);
        return (1.0 - w) * dens[b] + w * dens[b + 1];
    };
    auto curve = RateCurve::tabulate(domain, interp, opts.grid_points);

    std::vector<double> rates(curve.rates().begin(), curve.rates().end());
    std::vector<double> times(curve.times().begin(), curve.times().end());
    double integral = trapezoid(times, rates);
    if (!(integral > 0.0)) throw NumericalError("kernel estimate integrates to zero");
    for (double& r : rates) r *= mean_count / integral;
    const double floor = opts.floor_fraction * mean_count / len;
    for (double& r : rates) r = std::max(r, floor);
    integral = trapezoid(times, rates);
    for (double& r : rates) r *= mean_count / integral;
    return RateCurve(domain, std::move(times), std::move(rates));
}

double imi_simulated_mean_count(const ImiGrid& model, std::size_t trains, std::uint64_t seed)
{
    const auto sample = sample_imi(model, trains, seed);
    return sample.mean_cardinality();
}

ImiGrid estimate_intensity_imi(const TrainSample& sample, const ImiOptions& opts)
{
    require(sample.mean_cardinality() >= 1.0, "IMI estimation needs at least one event per train on average");
    require(opts.time_points >= 2 && opts.lag_points >= 2 && opts.lag_bins >= 2, "IMI grids too small");

    const TimeDomain& domain = sample.domain();
    const double len = domain.length();
    const RateCurve marginal = estimate_intensity_kernel(sample, opts.marginal);

    const std::size_t nb = opts.lag_bins;
    const double width = len / static_cast<double>(nb);
    std::vector<double> events(nb, 0.0), exposure(nb, 0.0);
    std::vector<double> lags;
    lags.reserve(sample.total_events());

    auto add_segment = [&](double start, double end, bool closed_by_event) {
        const double seg = end - start;
        if (closed_by_event) {
            lags.push_back(seg);
            const auto b = std::min(static_cast<std::size_t>(seg / width), nb - 1);
            events[b] += 1.0;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            const double lo = width * static_cast<double>(b);
            if (lo >= seg) break;
            const double w = std::min(width, seg - lo);
            exposure[b] += marginal.rate(start + lo + 0.5 * w) * w;
        }
    };
    for (const auto& tr : sample) {
        double prev = domain.start();
        for (double s : tr.times()) {
            add_segment(prev, s, true);
            prev = s;
        }
        add_segment(prev, domain.end(), false);
    }

    // smooth counts and exposure alike, mirrored at lag 0
    double h = silverman_bandwidth(lags);
    h = std::max(h, 2.0 * width);
    const auto kern = gaussian_weights(width, h);
    const auto cutoff = static_cast<long>(kern.size() - 1);
    const long last = static_cast<long>(nb - 1);
    auto smooth = [&](const std::vector<double>& v) {
        std::vector<double> out(nb, 0.0);
        for (long g = 0; g <= last; ++g) {
            double s = 0.0;
            for (long b = std::max(0L, g - cutoff); b <= std::min(last, g + cutoff); ++b)
                s += v[b] * kern[std::abs(g - b)];
            for (long b = 0; b <= std::min(last, cutoff - g - 1); ++b) s += v[b] * kern[g + b + 1];
            out[g] = s;
        }
        return out;
    };
    const auto ev_s = smooth(events);
    const auto ex_s = smooth(exposure);

    std::vector<double> lag_grid(opts.lag_points), lag_factor(opts.lag_points);
    for (std::size_t j = 0; j < opts.lag_points; ++j) {
        const double lag = j + 1 == opts.lag_points ? len : len * static_cast<double>(j) /
                                                                 static_cast<double>(opts.lag_points - 1);
        lag_grid[j] = lag;
        const double pos = std::clamp(lag / width - 0.5, 0.0, static_cast<double>(last));
        const auto b = std::min(static_cast<std::size_t>(pos), nb - 2);
        const double w = pos - static_cast<double>(b);
        const double ev = (1.0 - w) * ev_s[b] + w * ev_s[b + 1];
        const double ex = (1.0 - w) * ex_s[b] + w * ex_s[b + 1];
        lag_factor[j] = (ev + opts.pseudo_count) / (ex + opts.pseudo_count);
    }

    std::vector<double> time_grid(opts.time_points);
    for (std::size_t i = 0; i < opts.time_points; ++i)
        time_grid[i] = i + 1 == opts.time_points
                           ? domain.end()
                           : domain.start() + len * static_cast<double>(i) / static_cast<double>(opts.time_points - 1);

    ImiGrid model(marginal, std::move(time_grid), std::move(lag_grid), std::move(lag_factor), 1.0);
    const double target = sample.mean_cardinality();
    for (int round = 0; round < opts.calibration_rounds; ++round) {
        const double simulated = imi_simulated_mean_count(model, opts.calibration_trains, opts.calibration_seed);
        if (!(simulated > 0.0)) break;
        const double ratio = target / simulated;
        if (std::abs(ratio - 1.0) <= opts.calibration_tolerance) break;
        model = model.rescaled(ratio);
    }
    return model;
}

}  // namespace spikedepth

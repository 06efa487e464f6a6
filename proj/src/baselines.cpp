#include "spikedepth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spikedepth/error.hpp"
#include "spikedepth/spike_metric.hpp"

namespace spikedepth {

std::vector<double> bin_counts(const SpikeTrain& train, std::size_t bins)
{
    require(bins > 0, "bin count must be positive");
    std::vector<double> counts(bins, 0.0);
    const auto& dom = train.domain();
    for (double t : train.times()) {
        const auto idx = static_cast<std::size_t>((t - dom.start()) / dom.length() * static_cast<double>(bins));
        counts[std::min(idx, bins - 1)] += 1.0;
    }
    return counts;
}

BinnedGaussian fit_binned_gaussian(const TrainSample& sample, std::size_t bins, double variance_floor)
{
    require(sample.size() > 0, "cannot fit a binned model to an empty sample");
    require(variance_floor > 0.0, "variance floor must be positive");
    BinnedGaussian model{sample.domain(), std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0),
                         sample.mean_cardinality()};
    const double n = static_cast<double>(sample.size());
    std::vector<std::vector<double>> counts;
    counts.reserve(sample.size());
    for (const auto& tr : sample) counts.push_back(bin_counts(tr, bins));
    for (const auto& c : counts)
        for (std::size_t b = 0; b < bins; ++b) model.mean[b] += c[b] / n;
    for (const auto& c : counts)
        for (std::size_t b = 0; b < bins; ++b) model.variance[b] += (c[b] - model.mean[b]) * (c[b] - model.mean[b]) / n;
    for (double& v : model.variance) v = std::max(v, variance_floor);
    return model;
}

double BinnedGaussian::log_likelihood(const SpikeTrain& train) const
{
    require(train.domain() == domain, "train and model use different observation windows");
    const auto counts = bin_counts(train, mean.size());
    double ll = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double z = counts[b] - mean[b];
        ll -= 0.5 * (std::log(2.0 * std::numbers::pi * variance[b]) + z * z / variance[b]);
    }
    return ll;
}

Label classify_lm(const SpikeTrain& train, const BinnedGaussian& f, const BinnedGaussian& g)
{
    const double lf = f.log_likelihood(train);
    const double lg = g.log_likelihood(train);
    if (lf > lg) return Label::F;
    if (lf < lg) return Label::G;
    return cardinality_fallback(train.size(), f.mean_count, g.mean_count);
}

Label classify_mm2(const SpikeTrain& train, const SpikeTrain& median_f, const SpikeTrain& median_g, double mu,
                   double mean_f, double mean_g)
{
    const double df = d_mu(train, median_f, mu);
    const double dg = d_mu(train, median_g, mu);
    if (df < dg) return Label::F;
    if (df > dg) return Label::G;
    return cardinality_fallback(train.size(), mean_f, mean_g);
}

}  // namespace spikedepth

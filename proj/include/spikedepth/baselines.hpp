#pragma once

#include <cstddef>
#include <vector>

#include "spikedepth/ddclass.hpp"
#include "spikedepth/median.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// Gaussian model of binned event counts with diagonal covariance.
struct BinnedGaussian {
    TimeDomain domain;
    std::vector<double> mean;
    std::vector<double> variance;
    double mean_count;

    double log_likelihood(const SpikeTrain& train) const;
};

std::vector<double> bin_counts(const SpikeTrain& train, std::size_t bins);

BinnedGaussian fit_binned_gaussian(const TrainSample& sample, std::size_t bins = 10,
                                   double variance_floor = 1e-6);

/// Likelihood method: larger Gaussian log-likelihood of the bin counts wins.
Label classify_lm(const SpikeTrain& train, const BinnedGaussian& f, const BinnedGaussian& g);

/// Minimum d_mu distance to each group's median train.
Label classify_mm2(const SpikeTrain& train, const SpikeTrain& median_f, const SpikeTrain& median_g,
                   double mu, double mean_f, double mean_g);

}  // namespace spikedepth

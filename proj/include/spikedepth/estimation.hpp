#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
/// Returns 0 when the spread is degenerate.
double silverman_bandwidth(std::span<const double> values);

struct KernelOptions {
    std::size_t grid_points = RateCurve::kDefaultGridPoints;
    // bins used for the binned Gaussian convolution before interpolation
    std::size_t bins = 2001;
    // 0 selects Silverman's rule on the pooled events
    double bandwidth = 0.0;
    // floor as a fraction of the mean rate
    double floor_fraction = 1e-6;
};

/**
 * Gaussian kernel estimate of a Poisson intensity from pooled event times,
 * reflected at both domain edges and scaled so that its integral equals the
 * mean train cardinality. A sample with no events at all yields a flat curve
 * at the floor rate.
 */
RateCurve estimate_intensity_kernel(const TrainSample& sample, const KernelOptions& opts = {});

struct ImiOptions {
    KernelOptions marginal;
    std::size_t time_points = 200;
    std::size_t lag_points = 200;
    // fine lag bins used to accumulate event and exposure mass
    std::size_t lag_bins = 1000;
    // pseudo-count pulling the lag factor toward 1 where data is thin
    double pseudo_count = 1.0;
    // sequential-simulation calibration of the overall scale
    std::size_t calibration_trains = 1000;
    double calibration_tolerance = 0.02;
    int calibration_rounds = 8;
    std::uint64_t calibration_seed = 0x1d1a5eedULL;
};

/**
 * Multiplicative IMI fit lambda(t | H_t) = c * lambda_1(t) * g(t - t_last):
 * lambda_1 is the kernel marginal; g is the ratio of smoothed event counts to
 * smoothed lambda_1-exposure per time-since-last-event; c is adjusted until
 * the mean count of sequentially simulated trains is within tolerance of the
 * sample mean.
 */
ImiGrid estimate_intensity_imi(const TrainSample& sample, const ImiOptions& opts = {});

/// Mean count of trains drawn sequentially from an IMI model.
double imi_simulated_mean_count(const ImiGrid& model, std::size_t trains, std::uint64_t seed);

}  // namespace spikedepth

#pragma once

#include <cstddef>

#include "spikedepth/depth.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

struct MedianResult {
    SpikeTrain median;
    std::size_t cardinality;
    DepthScore depth;
};

/// The deterministic part of a model: itself if history-free, the marginal
/// curve of an IMI fit. Hawkes models have no tabulated marginal and are rejected.
IntensityModel history_free_marginal(const IntensityModel& model);

/**
 * Deepest train over the whole train space. Its cardinality maximizes the
 * cardinality weight (ties: nearest the sample mean count, then smaller);
 * its events split the rescaled window into equal parts.
 */
MedianResult estimate_median(const TrainSample& sample, const IntensityModel& model,
                             const CardinalityModel& cm, const DepthConfig& cfg = {});

/// Cardinality chosen by estimate_median.
std::size_t median_cardinality(const CardinalityModel& cm, double mean_count);

}  // namespace spikedepth

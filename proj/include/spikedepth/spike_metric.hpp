#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// Matched (f index, g index) pairs, increasing in both coordinates.
struct Alignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct MetricResult {
    double distance;
    Alignment alignment;
};

/**
 * Penalized elastic distance
 *   d^2 = M + N - 2 #matched + mu * sum over warping segments (sqrt(dt) - sqrt(ds))^2
 * minimized over piecewise-linear warpings whose nodes are the matched
 * pairs and the two domain corners.
 */
MetricResult d_mu_aligned(const SpikeTrain& f, const SpikeTrain& g, double mu);
double d_mu(const SpikeTrain& f, const SpikeTrain& g, double mu);

/// Squared cost of a fixed matching; pairs must be increasing in both indices.
double matching_cost(const SpikeTrain& f, const SpikeTrain& g, const Alignment& alignment,
                     double mu);

}  // namespace spikedepth

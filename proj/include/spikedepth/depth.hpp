#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// Probability mass over cardinalities 0..k_max.
class CardinalityModel {
public:
    /// `pmf` need not be normalized; it must have positive total mass.
    explicit CardinalityModel(std::vector<double> pmf);

    /// Raw empirical frequencies of train sizes.
    static CardinalityModel empirical(const TrainSample& sample);
    /// Poisson(mean), truncated where the upper tail falls below 1e-15.
    static CardinalityModel poisson(double mean);

    std::size_t max_count() const { return pmf_.size() - 1; }
    double probability(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
    double mean() const;

    /// P(K <= k) and P(K >= k), accumulated separately from each tail.
    double cdf(std::size_t k) const;
    double survival(std::size_t k) const;

    /// min{P(K <= k), P(K >= k)}; zero when k has no mass.
    double depth(std::size_t k) const;
    /// depth(k) / max_j depth(j).
    double weight(std::size_t k) const;
    /// Cardinalities attaining weight 1.
    std::vector<std::size_t> modal_counts() const;

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    std::vector<double> survival_;
    double max_depth_ = 0.0;
};

double cardinality_depth(std::size_t k, const CardinalityModel& cm);
double cardinality_weight(std::size_t k, const CardinalityModel& cm);

enum class DepthVariant { Ilr, Simplified };

struct DepthConfig {
    double r = 1.0;
    DepthVariant variant = DepthVariant::Ilr;
};

struct DepthScore {
    double total = 0.0;
    double weight = 0.0;
    double conditional = 0.0;
    std::size_t cardinality = 0;
    // a rescaled spacing was not positive; conditional is reported as 0
    bool degenerate = false;
};

/// 1 / (1 - log((k+1)^(k+1) / total^(k+1) * prod spacings)); 0 if any spacing <= 0.
double ilr_depth_from_spacings(std::span<const double> spacings, double total);
/// 1 / (1 + 0.5 * sum (log(spacing / geometric mean))^2); 0 if any spacing <= 0.
double simplified_depth_from_spacings(std::span<const double> spacings);

double conditional_depth_ilr(const SpikeTrain& train, const CumulativeIntensity& ci);
double conditional_depth_simplified(const SpikeTrain& train, const CumulativeIntensity& ci);

DepthScore depth(const SpikeTrain& train, const CumulativeIntensity& ci, const CardinalityModel& cm,
                 const DepthConfig& cfg = {});
DepthScore depth(const SpikeTrain& train, const IntensityModel& model, const CardinalityModel& cm,
                 const DepthConfig& cfg = {});

/// Depth of every train in the sample.
std::vector<DepthScore> depth_all(const TrainSample& sample, const IntensityModel& model,
                                  const CardinalityModel& cm, const DepthConfig& cfg = {});

}  // namespace spikedepth

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spikedepth/depth.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/**
 * Monte-Carlo delta-quantile C_k of G = prod_{i=1}^{k+1} (U_i - U_{i-1}) for
 * k ordered uniforms on [0, total] with U_0 = 0, U_{k+1} = total.
 * Uses the inverse empirical CDF (order statistic ceil(delta * n_mc)).
 */
double mc_spacing_product_quantile(std::size_t k, double total, double delta, std::size_t n_mc,
                                   std::uint64_t seed);

/// t_k = w(k)^r / (1 - log(C_k ((k+1)/total)^(k+1))).
double threshold_tk(std::size_t k, const CardinalityModel& cm, const DepthConfig& cfg, double c_k,
                    double total);

/// Same threshold with log C_k supplied, for cardinalities where C_k underflows.
double threshold_tk_log(std::size_t k, double weight_r, double log_c_k, double total);

/**
 * Sorted Monte-Carlo draws of log G for a unit window, one table per k,
 * computed on first use. Because spacings of uniforms on [0, L] are L times
 * those on [0, 1], log G on [0, L] is (k+1) log L plus the unit draw, so a
 * single table serves every window length exactly.
 */
class SpacingQuantileCache {
public:
    SpacingQuantileCache(std::size_t n_mc, std::uint64_t seed);

    double log_quantile(std::size_t k, double total, double delta);
    std::size_t n_mc() const { return n_mc_; }

private:
    struct Entry {
        std::once_flag once;
        std::vector<double> sorted_log_unit;
    };
    const Entry& entry(std::size_t k);

    std::size_t n_mc_;
    std::uint64_t seed_;
    std::mutex mutex_;
    std::map<std::size_t, std::unique_ptr<Entry>> entries_;
};

struct OutlierOptions {
    double delta = 0.01;
    std::size_t n_mc = 100000;
    std::uint64_t seed = 1;
};

struct TrainVerdict {
    std::size_t cardinality;
    DepthScore depth;
    double total_intensity;
    double threshold;
    bool flagged;
};

struct DetectionMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct OutlierReport {
    std::vector<TrainVerdict> verdicts;
    std::size_t flagged_count = 0;
    double delta = 0.0;
    std::size_t n_mc = 0;
    std::uint64_t seed = 0;
    std::optional<DetectionMetrics> metrics;

    std::vector<std::size_t> flagged_indices() const;
};

/// Precision, recall and F1 with 0 for any undefined ratio.
DetectionMetrics score_detection(const std::vector<bool>& flagged, const std::vector<bool>& truth);

/**
 * Flags each train whose depth is below the threshold of its cardinality.
 * Window length Lambda(T2) is taken per train, so history-dependent models
 * get per-observation thresholds. `truth`, when given, marks real outliers.
 */
OutlierReport detect_outliers(const TrainSample& sample, const IntensityModel& model,
                              const CardinalityModel& cm, const DepthConfig& cfg,
                              const OutlierOptions& opts,
                              const std::optional<std::vector<bool>>& truth = std::nullopt,
                              SpacingQuantileCache* cache = nullptr);

}  // namespace spikedepth

#include "spikedepth/median.hpp"

#include <cmath>
#include <limits>

#include "spikedepth/error.hpp"

namespace spikedepth {

IntensityModel history_free_marginal(const IntensityModel& model)
{
    if (const auto* imi = std::get_if<ImiGrid>(&model)) return imi->marginal();
    if (std::holds_alternative<HawkesModel>(model))
        throw ValidationError("median needs a history-free intensity; fit an IMI model to Hawkes data");
    return model;
}

std::size_t median_cardinality(const CardinalityModel& cm, double mean_count)
{
    const auto modal = cm.modal_counts();
    std::size_t best = modal.front();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k : modal) {
        const double gap = std::abs(static_cast<double>(k) - mean_count);
        if (gap < best_gap) {  // strict: the smaller k wins a tie
            best = k;
            best_gap = gap;
        }
    }
    return best;
}

MedianResult estimate_median(const TrainSample& sample, const IntensityModel& model,
                             const CardinalityModel& cm, const DepthConfig& cfg)
{
    const IntensityModel marginal = history_free_marginal(model);
    const auto ci = cumulative(marginal, sample.domain());
    const std::size_t k = median_cardinality(cm, sample.mean_cardinality());

    std::vector<double> times(k);
    const double step = ci.total() / static_cast<double>(k + 1);
    for (std::size_t i = 0; i < k; ++i) times[i] = ci.inverse(step * static_cast<double>(i + 1));
    SpikeTrain median(sample.domain(), std::move(times));
    const DepthScore score = depth(median, ci, cm, cfg);
    return MedianResult{std::move(median), k, score};
}

}  // namespace spikedepth

#include "spikedepth/outlier.hpp"

#include <algorithm>
#include <cmath>

#include "spikedepth/error.hpp"
#include "spikedepth/rng.hpp"

namespace spikedepth {

namespace {

std::size_t order_index(double delta, std::size_t n)
{
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    const auto idx = static_cast<std::size_t>(std::ceil(delta * static_cast<double>(n)));
    return std::clamp<std::size_t>(idx, 1, n) - 1;
}

}  // namespace

SpacingQuantileCache::SpacingQuantileCache(std::size_t n_mc, std::uint64_t seed) : n_mc_(n_mc), seed_(seed)
{
    require(n_mc >= 1, "n_mc must be at least 1");
}

const SpacingQuantileCache::Entry& SpacingQuantileCache::entry(std::size_t k)
{
    Entry* e;
    {
        std::lock_guard lock(mutex_);
        auto& slot = entries_[k];
        if (!slot) slot = std::make_unique<Entry>();
        e = slot.get();
    }
    std::call_once(e->once, [&] {
        auto& v = e->sorted_log_unit;
        v.assign(n_mc_, 0.0);
        if (k > 0) {
            // spacings of k ordered uniforms on [0, 1] are E_i / sum E, E_i ~ Exp(1)
            CounterRng rng(seed_, k);
            const double parts = static_cast<double>(k + 1);
            for (auto& x : v) {
                double sum = 0.0, log_sum = 0.0;
                for (std::size_t i = 0; i <= k; ++i) {
                    const double ei = rng.exponential();
                    sum += ei;
                    log_sum += std::log(ei);
                }
                x = log_sum - parts * std::log(sum);
            }
            std::sort(v.begin(), v.end());
        }
    });
    return *e;
}

double SpacingQuantileCache::log_quantile(std::size_t k, double total, double delta)
{
    require(total > 0.0, "window length must be positive");
    const auto& e = entry(k);
    return static_cast<double>(k + 1) * std::log(total) + e.sorted_log_unit[order_index(delta, n_mc_)];
}

double mc_spacing_product_quantile(std::size_t k, double total, double delta, std::size_t n_mc,
                                   std::uint64_t seed)
{
    SpacingQuantileCache cache(n_mc, seed);
    return std::exp(cache.log_quantile(k, total, delta));
}

double threshold_tk_log(std::size_t k, double weight_r, double log_c_k, double total)
{
    const double parts = static_cast<double>(k + 1);
    const double x = std::min(0.0, log_c_k + parts * std::log(parts / total));
    return weight_r / (1.0 - x);
}

double threshold_tk(std::size_t k, const CardinalityModel& cm, const DepthConfig& cfg, double c_k,
                    double total)
{
    require(c_k > 0.0, "C_k must be positive");
    return threshold_tk_log(k, std::pow(cm.weight(k), cfg.r), std::log(c_k), total);
}

std::vector<std::size_t> OutlierReport::flagged_indices() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < verdicts.size(); ++i)
        if (verdicts[i].flagged) out.push_back(i);
    return out;
}

DetectionMetrics score_detection(const std::vector<bool>& flagged, const std::vector<bool>& truth)
{
    require(flagged.size() == truth.size(), "ground truth must cover every train");
    DetectionMetrics m;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
        if (flagged[i] && truth[i]) ++m.true_positives;
        if (flagged[i] && !truth[i]) ++m.false_positives;
        if (!flagged[i] && truth[i]) ++m.false_negatives;
    }
    const auto tp = static_cast<double>(m.true_positives);
    const double detected = tp + static_cast<double>(m.false_positives);
    const double actual = tp + static_cast<double>(m.false_negatives);
    m.precision = detected > 0.0 ? tp / detected : 0.0;
    m.recall = actual > 0.0 ? tp / actual : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 / (1.0 / m.recall + 1.0 / m.precision) : 0.0;
    return m;
}

OutlierReport detect_outliers(const TrainSample& sample, const IntensityModel& model,
                              const CardinalityModel& cm, const DepthConfig& cfg,
                              const OutlierOptions& opts, const std::optional<std::vector<bool>>& truth,
                              SpacingQuantileCache* cache)
{
    require(opts.delta > 0.0 && opts.delta < 1.0, "delta must lie in (0, 1)");
    require(cfg.variant == DepthVariant::Ilr,
            "depth thresholds are derived for the ILR depth; use the ILR variant for detection");
    std::optional<SpacingQuantileCache> local;
    if (cache == nullptr) {
        local.emplace(opts.n_mc, opts.seed);
        cache = &*local;
    }

    OutlierReport report;
    report.delta = opts.delta;
    report.n_mc = cache->n_mc();
    report.seed = opts.seed;
    report.verdicts.reserve(sample.size());

    std::optional<CumulativeIntensity> shared;
    if (!is_history_dependent(model)) shared.emplace(cumulative(model, sample.domain()));

    for (const auto& tr : sample) {
        const CumulativeIntensity ci = shared ? *shared : cumulative(model, tr);
        const DepthScore score = depth(tr, ci, cm, cfg);
        const std::size_t k = tr.size();
        const double total = ci.total();
        const double log_c = cache->log_quantile(k, total, opts.delta);
        const double t_k = threshold_tk_log(k, std::pow(score.weight, cfg.r), log_c, total);
        const bool flag = score.total < t_k;
        report.verdicts.push_back(TrainVerdict{k, score, total, t_k, flag});
        if (flag) ++report.flagged_count;
    }

    if (truth) {
        std::vector<bool> flagged;
        flagged.reserve(report.verdicts.size());
        for (const auto& v : report.verdicts) flagged.push_back(v.flagged);
        report.metrics = score_detection(flagged, *truth);
    }
    return report;
}

}  // namespace spikedepth

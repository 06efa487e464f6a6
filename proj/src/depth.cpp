#include "spikedepth/depth.hpp"

#include <algorithm>
#include <cmath>

#include "spikedepth/error.hpp"

namespace spikedepth {

CardinalityModel::CardinalityModel(std::vector<double> pmf) : pmf_(std::move(pmf))
{
    require(!pmf_.empty(), "cardinality model needs at least one count");
    double mass = 0.0;
    for (double p : pmf_) {
        require(std::isfinite(p) && p >= 0.0, "cardinality probabilities must be non-negative");
        mass += p;
    }
    require(mass > 0.0, "cardinality model has no mass");
    for (double& p : pmf_) p /= mass;

    const std::size_t n = pmf_.size();
    cdf_.resize(n);
    survival_.resize(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) cdf_[k] = (acc += pmf_[k]);
    acc = 0.0;
    for (std::size_t k = n; k-- > 0;) survival_[k] = (acc += pmf_[k]);
    for (std::size_t k = 0; k < n; ++k) max_depth_ = std::max(max_depth_, depth(k));
}

CardinalityModel CardinalityModel::empirical(const TrainSample& sample)
{
    std::size_t kmax = 0;
    for (const auto& tr : sample) kmax = std::max(kmax, tr.size());
    std::vector<double> counts(kmax + 1, 0.0);
    for (const auto& tr : sample) counts[tr.size()] += 1.0;
    return CardinalityModel(std::move(counts));
}

CardinalityModel CardinalityModel::poisson(double mean)
{
    require(std::isfinite(mean) && mean >= 0.0, "Poisson mean must be non-negative");
    if (mean == 0.0) return CardinalityModel({1.0});
    std::vector<double> pmf;
    for (std::size_t k = 0;; ++k) {
        const double kd = static_cast<double>(k);
        const double p = std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
        pmf.push_back(p);
        if (kd > mean && p < 1e-17) break;
    }
    return CardinalityModel(std::move(pmf));
}

double CardinalityModel::mean() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<double>(k) * pmf_[k];
    return m;
}

double CardinalityModel::cdf(std::size_t k) const { return k < cdf_.size() ? cdf_[k] : 1.0; }

double CardinalityModel::survival(std::size_t k) const { return k < survival_.size() ? survival_[k] : 0.0; }

double CardinalityModel::depth(std::size_t k) const
{
    if (k >= pmf_.size() || pmf_[k] <= 0.0) return 0.0;
    return std::min(cdf_[k], survival_[k]);
}

double CardinalityModel::weight(std::size_t k) const
{
    return std::min(1.0, depth(k) / max_depth_);
}

std::vector<std::size_t> CardinalityModel::modal_counts() const
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < pmf_.size(); ++k)
        if (pmf_[k] > 0.0 && depth(k) >= max_depth_ * (1.0 - 1e-12)) out.push_back(k);
    return out;
}

double cardinality_depth(std::size_t k, const CardinalityModel& cm) { return cm.depth(k); }

double cardinality_weight(std::size_t k, const CardinalityModel& cm) { return cm.weight(k); }

double ilr_depth_from_spacings(std::span<const double> spacings, double total)
{
    const auto n = static_cast<double>(spacings.size());
    double log_term = n * std::log(n) - n * std::log(total);
    for (double s : spacings) {
        if (!(s > 0.0)) return 0.0;
        log_term += std::log(s);
    }
    // AM-GM bounds the product term by 1; clip rounding above it
    log_term = std::min(log_term, 0.0);
    return 1.0 / (1.0 - log_term);
}

double simplified_depth_from_spacings(std::span<const double> spacings)
{
    std::vector<double> logs;
    logs.reserve(spacings.size());
    for (double s : spacings) {
        if (!(s > 0.0)) return 0.0;
        logs.push_back(std::log(s));
    }
    double mean = 0.0;
    for (double l : logs) mean += l - logs.front();
    mean = logs.front() + mean / static_cast<double>(logs.size());
    double ss = 0.0;
    for (double l : logs) ss += (l - mean) * (l - mean);
    return 1.0 / (1.0 + 0.5 * ss);
}

double conditional_depth_ilr(const SpikeTrain& train, const CumulativeIntensity& ci)
{
    const auto sp = rescaled_spacings(train, ci);
    return ilr_depth_from_spacings(sp, ci.total());
}

double conditional_depth_simplified(const SpikeTrain& train, const CumulativeIntensity& ci)
{
    const auto sp = rescaled_spacings(train, ci);
    return simplified_depth_from_spacings(sp);
}

DepthScore depth(const SpikeTrain& train, const CumulativeIntensity& ci, const CardinalityModel& cm,
                 const DepthConfig& cfg)
{
    require(cfg.r > 0.0, "depth exponent r must be positive");
    require(train.domain() == ci.domain(), "cumulative intensity built for another domain");
    const auto sp = rescaled_spacings(train, ci);
    DepthScore s;
    s.cardinality = train.size();
    s.degenerate = std::any_of(sp.begin(), sp.end(), [](double v) { return !(v > 0.0); });
    s.conditional = cfg.variant == DepthVariant::Ilr ? ilr_depth_from_spacings(sp, ci.total())
                                                     : simplified_depth_from_spacings(sp);
    s.weight = cm.weight(train.size());
    s.total = std::pow(s.weight, cfg.r) * s.conditional;
    return s;
}

DepthScore depth(const SpikeTrain& train, const IntensityModel& model, const CardinalityModel& cm,
                 const DepthConfig& cfg)
{
    return depth(train, cumulative(model, train), cm, cfg);
}

std::vector<DepthScore> depth_all(const TrainSample& sample, const IntensityModel& model,
                                  const CardinalityModel& cm, const DepthConfig& cfg)
{
    std::vector<DepthScore> out;
    out.reserve(sample.size());
    if (is_history_dependent(model)) {
        for (const auto& tr : sample) out.push_back(depth(tr, model, cm, cfg));
    } else {
        const auto ci = cumulative(model, sample.domain());
        for (const auto& tr : sample) out.push_back(depth(tr, ci, cm, cfg));
    }
    return out;
}

}  // namespace spikedepth

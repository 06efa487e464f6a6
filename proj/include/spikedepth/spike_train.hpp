#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spikedepth {

/// Closed observation window [t_start, t_end].
class TimeDomain {
public:
    TimeDomain(double t_start, double t_end);

    double start() const { return start_; }
    double end() const { return end_; }
    double length() const { return end_ - start_; }

    /// Strictly inside the window.
    bool interior(double t) const { return t > start_ && t < end_; }

    friend bool operator==(const TimeDomain&, const TimeDomain&) = default;

private:
    double start_;
    double end_;
};

/**
 * Event times strictly increasing and strictly inside the domain. Events on
 * the boundary are rejected: a zero-length leading or trailing interval has
 * no finite log-ratio.
 */
class SpikeTrain {
public:
    explicit SpikeTrain(TimeDomain domain, std::vector<double> times = {});

    const TimeDomain& domain() const { return domain_; }
    std::span<const double> times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double operator[](std::size_t i) const { return times_[i]; }

    friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

private:
    TimeDomain domain_;
    std::vector<double> times_;
};

/// Inter-event intervals including both boundary gaps; length k+1.
std::vector<double> isi_vector(const SpikeTrain& train);

/// A non-empty set of trains on one domain, optionally labelled per train.
class TrainSample {
public:
    explicit TrainSample(std::vector<SpikeTrain> trains);
    TrainSample(std::vector<SpikeTrain> trains, std::vector<std::string> labels);

    const TimeDomain& domain() const { return trains_.front().domain(); }
    std::size_t size() const { return trains_.size(); }
    const SpikeTrain& operator[](std::size_t i) const { return trains_[i]; }
    const std::vector<SpikeTrain>& trains() const { return trains_; }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<std::string>& labels() const { return labels_; }

    double mean_cardinality() const;
    std::size_t total_events() const;

    /// Trains whose label equals `label`, in original order.
    TrainSample with_label(const std::string& label) const;

    /// Concatenation; both samples must share a domain.
    static TrainSample concat(const TrainSample& a, const TrainSample& b);

    auto begin() const { return trains_.begin(); }
    auto end() const { return trains_.end(); }

private:
    std::vector<SpikeTrain> trains_;
    std::vector<std::string> labels_;
};

}  // namespace spikedepth

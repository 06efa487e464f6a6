#include "spikedepth/spike_train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "spikedepth/error.hpp"

namespace spikedepth {

TimeDomain::TimeDomain(double t_start, double t_end) : start_(t_start), end_(t_end)
{
    require(std::isfinite(t_start) && std::isfinite(t_end), "time domain bounds must be finite");
    require(t_start < t_end, "time domain needs t_start < t_end");
}

SpikeTrain::SpikeTrain(TimeDomain domain, std::vector<double> times)
    : domain_(domain), times_(std::move(times))
{
    for (std::size_t i = 0; i < times_.size(); ++i) {
        const double t = times_[i];
        if (!domain_.interior(t)) {
            std::ostringstream msg;
            msg << "event " << i << " at " << t << " is not inside (" << domain_.start() << ", "
                << domain_.end() << ")";
            throw ValidationError(msg.str());
        }
        if (i > 0 && !(t > times_[i - 1])) {
            std::ostringstream msg;
            msg << "event times must be strictly increasing (index " << i << ")";
            throw ValidationError(msg.str());
        }
    }
}

std::vector<double> isi_vector(const SpikeTrain& train)
{
    const auto& d = train.domain();
    std::vector<double> u;
    u.reserve(train.size() + 1);
    double prev = d.start();
    for (double t : train.times()) {
        u.push_back(t - prev);
        prev = t;
    }
    u.push_back(d.end() - prev);
    return u;
}

TrainSample::TrainSample(std::vector<SpikeTrain> trains) : trains_(std::move(trains))
{
    require(!trains_.empty(), "a train sample must not be empty");
    for (const auto& tr : trains_)
        require(tr.domain() == trains_.front().domain(), "all trains in a sample must share a domain");
}

TrainSample::TrainSample(std::vector<SpikeTrain> trains, std::vector<std::string> labels)
    : TrainSample(std::move(trains))
{
    require(labels.empty() || labels.size() == trains_.size(), "one label per train is required");
    labels_ = std::move(labels);
}

double TrainSample::mean_cardinality() const
{
    return static_cast<double>(total_events()) / static_cast<double>(trains_.size());
}

std::size_t TrainSample::total_events() const
{
    return std::accumulate(trains_.begin(), trains_.end(), std::size_t{0},
                           [](std::size_t acc, const SpikeTrain& t) { return acc + t.size(); });
}

TrainSample TrainSample::with_label(const std::string& label) const
{
    require(has_labels(), "sample carries no labels");
    std::vector<SpikeTrain> picked;
    std::vector<std::string> picked_labels;
    for (std::size_t i = 0; i < trains_.size(); ++i) {
        if (labels_[i] == label) {
            picked.push_back(trains_[i]);
            picked_labels.push_back(label);
        }
    }
    require(!picked.empty(), "no train carries label '" + label + "'");
    return TrainSample(std::move(picked), std::move(picked_labels));
}

TrainSample TrainSample::concat(const TrainSample& a, const TrainSample& b)
{
    require(a.domain() == b.domain(), "cannot concatenate samples on different domains");
    require(a.has_labels() == b.has_labels(), "cannot mix labelled and unlabelled samples");
    std::vector<SpikeTrain> trains(a.trains_);
    trains.insert(trains.end(), b.trains_.begin(), b.trains_.end());
    std::vector<std::string> labels(a.labels_);
    labels.insert(labels.end(), b.labels_.begin(), b.labels_.end());
    return TrainSample(std::move(trains), std::move(labels));
}

}  // namespace spikedepth

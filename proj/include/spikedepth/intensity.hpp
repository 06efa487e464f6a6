#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// Homogeneous rate.
struct ConstantRate {
    double rate;
};

/**
 * Deterministic rate tabulated on a strictly increasing grid that spans the
 * domain. Between nodes the rate is linear, so the cumulative integral is
 * piecewise quadratic and is evaluated and inverted exactly for that
 * interpolant. Copies share the underlying table.
 */
class RateCurve {
public:
    static constexpr std::size_t kDefaultGridPoints = 10001;

    RateCurve(TimeDomain domain, std::vector<double> times, std::vector<double> rates);

    /// Uniform grid sampling of `rate_fn`; negative samples are an error.
    static RateCurve tabulate(TimeDomain domain, const std::function<double(double)>& rate_fn,
                              std::size_t points = kDefaultGridPoints);

    const TimeDomain& domain() const { return data_->domain; }
    std::span<const double> times() const { return data_->times; }
    std::span<const double> rates() const { return data_->rates; }

    double rate(double t) const;
    /// Integral of the rate from the domain start to t.
    double cumulative(double t) const;
    double total() const { return data_->cumulative.back(); }
    /// Smallest t with cumulative(t) == y, y in [0, total()].
    double inverse(double y) const;
    /// Upper bound of the rate on [t, domain end].
    double max_rate_from(double t) const;
    double max_rate() const { return data_->suffix_max.front(); }

private:
    struct Data {
        TimeDomain domain;
        std::vector<double> times;
        std::vector<double> rates;
        std::vector<double> cumulative;
        std::vector<double> suffix_max;
    };

    std::size_t cell(double t) const;

    std::shared_ptr<const Data> data_;
};

/// History-free rate used as the baseline of a Hawkes process.
using BaseRate = std::variant<ConstantRate, RateCurve>;

/// lambda(t | H_t) = base_scale * base(t) + sum_{t_i < t} alpha * exp(-beta (t - t_i)).
struct HawkesModel {
    BaseRate base;
    double base_scale = 0.5;
    double alpha = 0.0;
    double beta = 1.0;
};

/**
 * Inhomogeneous Markov interval intensity, tabulated on a (time, lag) grid
 * where lag is the time since the previous event (or since the domain start
 * when there is none). The grid value is scale * marginal(t) * lag_factor(lag).
 */
class ImiGrid {
public:
    ImiGrid(RateCurve marginal, std::vector<double> time_grid, std::vector<double> lag_grid,
            std::vector<double> lag_factor, double scale);

    const TimeDomain& domain() const { return marginal_.domain(); }
    const RateCurve& marginal() const { return marginal_; }
    std::span<const double> time_grid() const { return time_grid_; }
    std::span<const double> lag_grid() const { return lag_grid_; }
    std::span<const double> lag_factor() const { return lag_factor_; }
    /// Row-major [time][lag].
    std::span<const double> rates() const { return rates_; }
    double scale() const { return scale_; }

    /// Bilinear interpolation of the tabulated rate.
    double rate(double t, double lag) const;
    double conditional_rate(double t, double last_event) const { return rate(t, t - last_event); }
    /// Interpolated lag factor g(lag).
    double lag_factor_at(double lag) const;
    double max_rate() const { return max_rate_; }

    ImiGrid rescaled(double factor) const;

private:
    RateCurve marginal_;
    std::vector<double> time_grid_;
    std::vector<double> lag_grid_;
    std::vector<double> lag_factor_;
    std::vector<double> rates_;
    double scale_;
    double max_rate_;
};

using IntensityModel = std::variant<ConstantRate, RateCurve, HawkesModel, ImiGrid>;

bool is_history_dependent(const IntensityModel& model);

/**
 * Lambda(t) = integral of the conditional intensity from the domain start,
 * bound to one domain and, for history-dependent models, to one train.
 */
class CumulativeIntensity {
public:
    double operator()(double t) const;
    double rate(double t) const;
    double total() const { return total_; }
    const TimeDomain& domain() const { return domain_; }
    double inverse(double y) const;

    struct Linear {
        double rate;
    };
    struct Curve {
        RateCurve curve;
        double scale;
    };
    struct Hawkes {
        BaseRate base;
        double base_scale;
        double alpha;
        double beta;
        std::vector<double> events;
        // excitation sum just after event j: sum_{i <= j} exp(-beta (t_j - t_i))
        std::vector<double> decay_sum;
        // Lambda at each event time
        std::vector<double> at_events;
    };
    struct Table {
        std::vector<double> times;
        std::vector<double> values;
    };
    using Rep = std::variant<Linear, Curve, Hawkes, Table>;

    CumulativeIntensity(TimeDomain domain, Rep rep);

private:
    double hawkes_value(const Hawkes& h, double t) const;
    double hawkes_rate(const Hawkes& h, double t) const;
    double safeguarded_inverse(double y, double lo, double hi) const;

    TimeDomain domain_;
    Rep rep_;
    double total_ = 0.0;
};

/// History-free models only.
CumulativeIntensity cumulative(const IntensityModel& model, const TimeDomain& domain);
/// Any model; history-dependent models integrate over this train's own history.
CumulativeIntensity cumulative(const IntensityModel& model, const SpikeTrain& train);

double inverse_cumulative(const CumulativeIntensity& ci, double y);

/// Maps each event through Lambda; the result lives on [0, Lambda(T2)].
SpikeTrain time_rescale(const SpikeTrain& train, const CumulativeIntensity& ci);

/// Lambda(s_i) - Lambda(s_{i-1}) for i = 1..k+1 with s_0 = T1, s_{k+1} = T2.
std::vector<double> rescaled_spacings(const SpikeTrain& train, const CumulativeIntensity& ci);

/**
 * Isometric log-ratio coordinates of a positive composition of length k+1
 * under the Helmert basis: row i is sqrt(i/(i+1)) * log(g(u_1..u_i) / u_{i+1}).
 */
std::vector<double> ilr_transform(std::span<const double> parts);

/// Centered log-ratio, log(u_i / g(u)).
std::vector<double> clr_transform(std::span<const double> parts);

}  // namespace spikedepth

#include "spikedepth/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikedepth/error.hpp"

namespace spikedepth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double base_cumulative(const BaseRate& base, const TimeDomain& domain, double t)
{
    return std::visit(overloaded{[&](const ConstantRate& c) { return c.rate * (t - domain.start()); },
                                 [&](const RateCurve& c) { return c.cumulative(t); }},
                      base);
}

double base_rate(const BaseRate& base, double t)
{
    return std::visit(overloaded{[](const ConstantRate& c) { return c.rate; },
                                 [&](const RateCurve& c) { return c.rate(t); }},
                      base);
}

// Index of the grid cell [v[i], v[i+1]] holding x, clamped to the grid.
std::size_t locate(std::span<const double> v, double x)
{
    if (x <= v.front()) return 0;
    if (x >= v.back()) return v.size() - 2;
    auto it = std::upper_bound(v.begin(), v.end(), x);
    return static_cast<std::size_t>(it - v.begin()) - 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// RateCurve

RateCurve::RateCurve(TimeDomain domain, std::vector<double> times, std::vector<double> rates)
{
    require(times.size() >= 2, "a rate curve needs at least two grid points");
    require(times.size() == rates.size(), "rate curve grid and values differ in length");
    require(times.front() == domain.start() && times.back() == domain.end(),
            "rate curve grid must span the domain exactly");
    for (std::size_t i = 1; i < times.size(); ++i)
        require(times[i] > times[i - 1], "rate curve grid must be strictly increasing");
    for (double r : rates)
        require(std::isfinite(r) && r >= 0.0, "rates must be finite and non-negative");

    auto data = std::make_shared<Data>(Data{domain, std::move(times), std::move(rates), {}, {}});
    const std::size_t n = data->times.size();
    data->cumulative.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double h = data->times[i] - data->times[i - 1];
        data->cumulative[i] = data->cumulative[i - 1] + 0.5 * h * (data->rates[i] + data->rates[i - 1]);
    }
    data->suffix_max.assign(n, 0.0);
    data->suffix_max[n - 1] = data->rates[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        data->suffix_max[i] = std::max(data->rates[i], data->suffix_max[i + 1]);
    data_ = std::move(data);
}

RateCurve RateCurve::tabulate(TimeDomain domain, const std::function<double(double)>& rate_fn,
                              std::size_t points)
{
    require(points >= 2, "a rate curve needs at least two grid points");
    std::vector<double> t(points), r(points);
    const double step = domain.length() / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        t[i] = i + 1 == points ? domain.end() : domain.start() + step * static_cast<double>(i);
        r[i] = rate_fn(t[i]);
    }
    return RateCurve(domain, std::move(t), std::move(r));
}

std::size_t RateCurve::cell(double t) const { return locate(data_->times, t); }

double RateCurve::rate(double t) const
{
    const auto& d = *data_;
    const std::size_t j = cell(t);
    const double h = d.times[j + 1] - d.times[j];
    const double x = std::clamp((t - d.times[j]) / h, 0.0, 1.0);
    return d.rates[j] + x * (d.rates[j + 1] - d.rates[j]);
}

double RateCurve::cumulative(double t) const
{
    const auto& d = *data_;
    if (t <= d.times.front()) return 0.0;
    if (t >= d.times.back()) return d.cumulative.back();
    const std::size_t j = cell(t);
    const double h = d.times[j + 1] - d.times[j];
    const double dt = t - d.times[j];
    return d.cumulative[j] + d.rates[j] * dt + (d.rates[j + 1] - d.rates[j]) * dt * dt / (2.0 * h);
}

double RateCurve::inverse(double y) const
{
    const auto& d = *data_;
    require(y >= 0.0 && y <= d.cumulative.back() * (1.0 + 1e-12),
            "inverse of the cumulative intensity requested outside [0, Lambda(T2)]");
    auto it = std::lower_bound(d.cumulative.begin(), d.cumulative.end(), y);
    if (it == d.cumulative.end()) return d.times.back();
    const auto idx = static_cast<std::size_t>(it - d.cumulative.begin());
    if (*it == y || idx == 0) return d.times[idx];

    const std::size_t j = idx - 1;
    const double h = d.times[j + 1] - d.times[j];
    const double a = (d.rates[j + 1] - d.rates[j]) / (2.0 * h);
    const double b = d.rates[j];
    const double rem = y - d.cumulative[j];
    double dt;
    const double disc = b * b + 4.0 * a * rem;
    if (b + std::sqrt(std::max(disc, 0.0)) > 0.0)
        dt = 2.0 * rem / (b + std::sqrt(std::max(disc, 0.0)));
    else
        dt = h;
    dt = std::clamp(dt, 0.0, h);
    // one Newton refinement on the exact cell integral
    const double slope = b + 2.0 * a * dt;
    if (slope > 0.0) {
        const double resid = b * dt + a * dt * dt - rem;
        dt = std::clamp(dt - resid / slope, 0.0, h);
    }
    return d.times[j] + dt;
}

double RateCurve::max_rate_from(double t) const { return data_->suffix_max[cell(t)]; }

// ---------------------------------------------------------------------------
// ImiGrid

ImiGrid::ImiGrid(RateCurve marginal, std::vector<double> time_grid, std::vector<double> lag_grid,
                 std::vector<double> lag_factor, double scale)
    : marginal_(std::move(marginal)),
      time_grid_(std::move(time_grid)),
      lag_grid_(std::move(lag_grid)),
      lag_factor_(std::move(lag_factor)),
      scale_(scale)
{
    require(time_grid_.size() >= 2 && lag_grid_.size() >= 2, "IMI grids need at least two points");
    require(lag_factor_.size() == lag_grid_.size(), "lag factor must match the lag grid");
    require(std::isfinite(scale_) && scale_ > 0.0, "IMI scale must be positive");
    require(time_grid_.front() == domain().start() && time_grid_.back() == domain().end(),
            "IMI time grid must span the domain");
    require(lag_grid_.front() == 0.0, "IMI lag grid must start at 0");
    for (std::size_t i = 1; i < time_grid_.size(); ++i)
        require(time_grid_[i] > time_grid_[i - 1], "IMI time grid must increase");
    for (std::size_t i = 1; i < lag_grid_.size(); ++i)
        require(lag_grid_[i] > lag_grid_[i - 1], "IMI lag grid must increase");
    for (double g : lag_factor_) require(std::isfinite(g) && g >= 0.0, "lag factor must be non-negative");

    rates_.resize(time_grid_.size() * lag_grid_.size());
    max_rate_ = 0.0;
    for (std::size_t i = 0; i < time_grid_.size(); ++i) {
        const double m = marginal_.rate(time_grid_[i]);
        for (std::size_t j = 0; j < lag_grid_.size(); ++j) {
            const double v = scale_ * m * lag_factor_[j];
            rates_[i * lag_grid_.size() + j] = v;
            max_rate_ = std::max(max_rate_, v);
        }
    }
}

double ImiGrid::rate(double t, double lag) const
{
    const std::size_t nl = lag_grid_.size();
    const std::size_t i = locate(time_grid_, t);
    const std::size_t j = locate(lag_grid_, lag);
    const double x = std::clamp((t - time_grid_[i]) / (time_grid_[i + 1] - time_grid_[i]), 0.0, 1.0);
    const double y = std::clamp((lag - lag_grid_[j]) / (lag_grid_[j + 1] - lag_grid_[j]), 0.0, 1.0);
    const double* r0 = &rates_[i * nl];
    const double* r1 = &rates_[(i + 1) * nl];
    return (1.0 - x) * ((1.0 - y) * r0[j] + y * r0[j + 1]) + x * ((1.0 - y) * r1[j] + y * r1[j + 1]);
}

double ImiGrid::lag_factor_at(double lag) const
{
    const std::size_t j = locate(lag_grid_, lag);
    const double y = std::clamp((lag - lag_grid_[j]) / (lag_grid_[j + 1] - lag_grid_[j]), 0.0, 1.0);
    return (1.0 - y) * lag_factor_[j] + y * lag_factor_[j + 1];
}

ImiGrid ImiGrid::rescaled(double factor) const
{
    return ImiGrid(marginal_, time_grid_, lag_grid_, lag_factor_, scale_ * factor);
}

bool is_history_dependent(const IntensityModel& model)
{
    return std::holds_alternative<HawkesModel>(model) || std::holds_alternative<ImiGrid>(model);
}

// ---------------------------------------------------------------------------
// CumulativeIntensity

CumulativeIntensity::CumulativeIntensity(TimeDomain domain, Rep rep) : domain_(domain), rep_(std::move(rep))
{
    total_ = (*this)(domain_.end());
    if (!std::isfinite(total_) || total_ <= 0.0)
        throw NumericalError("cumulative intensity over the domain must be finite and positive");
}

double CumulativeIntensity::hawkes_value(const Hawkes& h, double t) const
{
    const double base = h.base_scale * base_cumulative(h.base, domain_, t);
    const auto n = static_cast<std::size_t>(std::lower_bound(h.events.begin(), h.events.end(), t) -
                                            h.events.begin());
    if (n == 0 || h.alpha == 0.0) return base;
    const double tail = h.decay_sum[n - 1] * std::exp(-h.beta * (t - h.events[n - 1]));
    return base + h.alpha / h.beta * (static_cast<double>(n) - tail);
}

double CumulativeIntensity::hawkes_rate(const Hawkes& h, double t) const
{
    const double base = h.base_scale * base_rate(h.base, t);
    const auto n = static_cast<std::size_t>(std::lower_bound(h.events.begin(), h.events.end(), t) -
                                            h.events.begin());
    if (n == 0) return base;
    return base + h.alpha * h.decay_sum[n - 1] * std::exp(-h.beta * (t - h.events[n - 1]));
}

double CumulativeIntensity::operator()(double t) const
{
    t = std::clamp(t, domain_.start(), domain_.end());
    return std::visit(
        overloaded{[&](const Linear& l) { return l.rate * (t - domain_.start()); },
                   [&](const Curve& c) { return c.scale * c.curve.cumulative(t); },
                   [&](const Hawkes& h) { return hawkes_value(h, t); },
                   [&](const Table& tab) {
                       const std::size_t j = locate(tab.times, t);
                       const double w = (t - tab.times[j]) / (tab.times[j + 1] - tab.times[j]);
                       return tab.values[j] + std::clamp(w, 0.0, 1.0) * (tab.values[j + 1] - tab.values[j]);
                   }},
        rep_);
}

double CumulativeIntensity::rate(double t) const
{
    return std::visit(overloaded{[&](const Linear& l) { return l.rate; },
                                 [&](const Curve& c) { return c.scale * c.curve.rate(t); },
                                 [&](const Hawkes& h) { return hawkes_rate(h, t); },
                                 [&](const Table& tab) {
                                     const std::size_t j = locate(tab.times, t);
                                     return (tab.values[j + 1] - tab.values[j]) /
                                            (tab.times[j + 1] - tab.times[j]);
                                 }},
                      rep_);
}

double CumulativeIntensity::safeguarded_inverse(double y, double lo, double hi) const
{
    const double f_lo = (*this)(lo) - y;
    const double f_hi = (*this)(hi) - y;
    if (f_lo >= 0.0) return lo;
    if (f_hi <= 0.0) return hi;
    double t = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
    const double ftol = 1e-14 * std::max(total_, 1.0);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = (*this)(t)-y;
        if (std::abs(f) <= ftol) return t;
        if (f < 0.0)
            lo = t;
        else
            hi = t;
        if (hi - lo <= 1e-15 * domain_.length()) break;
        const double r = rate(t);
        double next = r > 0.0 ? t - f / r : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    return t;
}

double CumulativeIntensity::inverse(double y) const
{
    require(std::isfinite(y) && y >= 0.0 && y <= total_ * (1.0 + 1e-12),
            "inverse of the cumulative intensity requested outside [0, Lambda(T2)]");
    y = std::min(y, total_);
    if (y == 0.0) return domain_.start();
    return std::visit(
        overloaded{[&](const Linear& l) { return std::min(domain_.start() + y / l.rate, domain_.end()); },
                   [&](const Curve& c) { return c.curve.inverse(std::min(y / c.scale, c.curve.total())); },
                   [&](const Hawkes& h) {
                       // events with Lambda(t_j) <= y bracket the answer
                       const auto n = static_cast<std::size_t>(
                           std::upper_bound(h.at_events.begin(), h.at_events.end(), y) - h.at_events.begin());
                       const double lo = n == 0 ? domain_.start() : h.events[n - 1];
                       const double hi = n == h.events.size() ? domain_.end() : h.events[n];
                       return safeguarded_inverse(y, lo, hi);
                   },
                   [&](const Table& tab) {
                       auto it = std::lower_bound(tab.values.begin(), tab.values.end(), y);
                       if (it == tab.values.end()) return tab.times.back();
                       const auto idx = static_cast<std::size_t>(it - tab.values.begin());
                       if (*it == y || idx == 0) return tab.times[idx];
                       const std::size_t j = idx - 1;
                       const double w = (y - tab.values[j]) / (tab.values[j + 1] - tab.values[j]);
                       return tab.times[j] + w * (tab.times[j + 1] - tab.times[j]);
                   }},
        rep_);
}

// ---------------------------------------------------------------------------
// construction

namespace {

void check_domain(const TimeDomain& model_domain, const TimeDomain& domain)
{
    require(model_domain == domain, "intensity model and train live on different domains");
}

void check_base(const BaseRate& base, const TimeDomain& domain)
{
    if (const auto* c = std::get_if<RateCurve>(&base)) check_domain(c->domain(), domain);
    if (const auto* c = std::get_if<ConstantRate>(&base))
        require(std::isfinite(c->rate) && c->rate > 0.0, "constant rate must be positive");
}

CumulativeIntensity hawkes_cumulative(const HawkesModel& m, const SpikeTrain& train)
{
    const auto& domain = train.domain();
    check_base(m.base, domain);
    require(m.alpha >= 0.0 && m.beta > 0.0 && m.alpha < m.beta,
            "Hawkes model needs 0 <= alpha < beta");
    require(m.base_scale > 0.0, "Hawkes base scale must be positive");

    CumulativeIntensity::Hawkes h{m.base, m.base_scale, m.alpha, m.beta, {}, {}, {}};
    h.events.assign(train.times().begin(), train.times().end());
    const std::size_t k = h.events.size();
    h.decay_sum.resize(k);
    h.at_events.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double t = h.events[j];
        double exc = 0.0;
        if (j > 0) {
            const double tail = h.decay_sum[j - 1] * std::exp(-m.beta * (t - h.events[j - 1]));
            exc = m.alpha / m.beta * (static_cast<double>(j) - tail);
            h.decay_sum[j] = 1.0 + tail;
        } else {
            h.decay_sum[j] = 1.0;
        }
        h.at_events[j] = m.base_scale * base_cumulative(m.base, domain, t) + exc;
    }
    return CumulativeIntensity(domain, std::move(h));
}

CumulativeIntensity imi_cumulative(const ImiGrid& m, const SpikeTrain& train)
{
    const auto& domain = train.domain();
    check_domain(m.domain(), domain);
    const double max_step = domain.length() / 2000.0;

    CumulativeIntensity::Table tab;
    tab.times.push_back(domain.start());
    tab.values.push_back(0.0);
    double last = domain.start();
    double acc = 0.0;
    auto integrate_to = [&](double b) {
        const double a = tab.times.back();
        const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / max_step)));
        const double h = (b - a) / static_cast<double>(steps);
        double prev_rate = m.rate(a, a - last);
        for (std::size_t s = 1; s <= steps; ++s) {
            const double t = s == steps ? b : a + h * static_cast<double>(s);
            const double r = m.rate(t, t - last);
            acc += 0.5 * (t - tab.times.back()) * (r + prev_rate);
            tab.times.push_back(t);
            tab.values.push_back(acc);
            prev_rate = r;
        }
    };
    for (double s : train.times()) {
        integrate_to(s);
        last = s;
    }
    integrate_to(domain.end());
    return CumulativeIntensity(domain, std::move(tab));
}

}  // namespace

CumulativeIntensity cumulative(const IntensityModel& model, const TimeDomain& domain)
{
    return std::visit(
        overloaded{[&](const ConstantRate& c) {
                       require(std::isfinite(c.rate) && c.rate > 0.0, "constant rate must be positive");
                       return CumulativeIntensity(domain, CumulativeIntensity::Linear{c.rate});
                   },
                   [&](const RateCurve& c) {
                       check_domain(c.domain(), domain);
                       return CumulativeIntensity(domain, CumulativeIntensity::Curve{c, 1.0});
                   },
                   [&](const HawkesModel&) -> CumulativeIntensity {
                       throw ValidationError("a Hawkes cumulative intensity needs the train's history");
                   },
                   [&](const ImiGrid&) -> CumulativeIntensity {
                       throw ValidationError("an IMI cumulative intensity needs the train's history");
                   }},
        model);
}

CumulativeIntensity cumulative(const IntensityModel& model, const SpikeTrain& train)
{
    if (const auto* h = std::get_if<HawkesModel>(&model)) return hawkes_cumulative(*h, train);
    if (const auto* g = std::get_if<ImiGrid>(&model)) return imi_cumulative(*g, train);
    return cumulative(model, train.domain());
}

double inverse_cumulative(const CumulativeIntensity& ci, double y) { return ci.inverse(y); }

SpikeTrain time_rescale(const SpikeTrain& train, const CumulativeIntensity& ci)
{
    require(train.domain() == ci.domain(), "cumulative intensity built for another domain");
    std::vector<double> times;
    times.reserve(train.size());
    for (double t : train.times()) times.push_back(ci(t));
    try {
        return SpikeTrain(TimeDomain(0.0, ci.total()), std::move(times));
    } catch (const ValidationError& e) {
        throw NumericalError(std::string("time rescaling produced an invalid train: ") + e.what());
    }
}

std::vector<double> rescaled_spacings(const SpikeTrain& train, const CumulativeIntensity& ci)
{
    std::vector<double> out;
    out.reserve(train.size() + 1);
    double prev = 0.0;
    for (double t : train.times()) {
        const double v = ci(t);
        out.push_back(v - prev);
        prev = v;
    }
    out.push_back(ci.total() - prev);
    return out;
}

std::vector<double> clr_transform(std::span<const double> parts)
{
    require(!parts.empty(), "composition must not be empty");
    std::vector<double> d(parts.size());
    double ref = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require(parts[i] > 0.0 && std::isfinite(parts[i]), "composition parts must be positive");
        const double l = std::log(parts[i]);
        if (i == 0) ref = l;
        d[i] = l - ref;
    }
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    for (double& v : d) v -= mean;
    return d;
}

std::vector<double> ilr_transform(std::span<const double> parts)
{
    require(parts.size() >= 2, "ILR needs at least two parts");
    std::vector<double> d(parts.size());
    double ref = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require(parts[i] > 0.0 && std::isfinite(parts[i]), "composition parts must be positive");
        const double l = std::log(parts[i]);
        if (i == 0) ref = l;
        d[i] = l - ref;
    }
    std::vector<double> out(parts.size() - 1);
    double running = 0.0;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        running += d[i - 1];
        const double n = static_cast<double>(i);
        out[i - 1] = std::sqrt(n / (n + 1.0)) * (running / n - d[i]);
    }
    return out;
}

}  // namespace spikedepth

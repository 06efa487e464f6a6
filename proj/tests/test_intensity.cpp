#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikedepth/error.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/rng.hpp"
#include "spikedepth/simulate.hpp"

using namespace spikedepth;

namespace {

const TimeDomain kUnit(0.0, 1.0);

// conditional intensity of a Hawkes model written out directly
double hawkes_rate_oracle(const HawkesModel& m, std::span<const double> events, double t)
{
    double base = std::holds_alternative<ConstantRate>(m.base) ? std::get<ConstantRate>(m.base).rate
                                                                : std::get<RateCurve>(m.base).rate(t);
    double v = m.base_scale * base;
    for (double s : events)
        if (s < t) v += m.alpha * std::exp(-m.beta * (t - s));
    return v;
}

// trapezoid integral of the oracle with breakpoints at every event
double hawkes_cumulative_oracle(const HawkesModel& m, std::span<const double> events, double t, double step)
{
    std::vector<double> knots{0.0};
    for (double s : events)
        if (s < t) knots.push_back(s);
    knots.push_back(t);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k], b = knots[k + 1];
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / step)));
        const double h = (b - a) / static_cast<double>(n);
        // right limit at an event includes its own jump only after the event
        auto f = [&](double x, bool left_end) {
            double v = hawkes_rate_oracle(m, events, x);
            if (left_end && k > 0) v += m.alpha;
            return v;
        };
        double s = 0.5 * (f(a, true) + f(b, false));
        for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i), false);
        total += s * h;
    }
    return total;
}

std::vector<double> random_times(CounterRng& rng, std::size_t k, const TimeDomain& d)
{
    std::vector<double> t;
    while (t.size() < k) {
        t.push_back(d.start() + d.length() * rng.uniform_open());
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
    }
    return t;
}

const RateCurve& parabola()
{
    static const RateCurve c = RateCurve::tabulate(kUnit, presets::parabola_rate);
    return c;
}

}  // namespace

TEST(Cumulative, ConstantRateIsLinear)
{
    const auto ci = cumulative(IntensityModel(ConstantRate{10.0}), kUnit);
    EXPECT_DOUBLE_EQ(ci(0.3), 3.0);
    EXPECT_DOUBLE_EQ(ci.total(), 10.0);
    EXPECT_DOUBLE_EQ(ci.inverse(5.0), 0.5);
    EXPECT_DOUBLE_EQ(ci.inverse(0.0), 0.0);
}

TEST(Cumulative, ParabolaTotalAndSymmetricInverse)
{
    const auto ci = cumulative(IntensityModel(parabola()), kUnit);
    EXPECT_NEAR(ci.total(), 8.0, 1e-6);
    // the rate vanishes at 1/2, so a tabulation error e in Lambda moves the
    // inverse there by about (e / 32)^(1/3); the round trip itself is tight
    EXPECT_NEAR(ci.inverse(4.0), 0.5, 2e-3);
    EXPECT_NEAR(ci(ci.inverse(4.0)), 4.0, 1e-9);
    // Lambda(t) = 32 (t - 1/2)^3 + 4
    for (double t : {0.1, 0.3, 0.55, 0.9}) EXPECT_NEAR(ci(t), 32.0 * std::pow(t - 0.5, 3) + 4.0, 1e-6);
    EXPECT_DOUBLE_EQ(ci.inverse(0.0), 0.0);
}

TEST(Cumulative, HawkesSingleSpikeClosedForm)
{
    const HawkesModel m = presets::bimodal_hawkes();
    const SpikeTrain tr(kUnit, {0.5});
    const auto ci = cumulative(IntensityModel(m), tr);
    const double base = presets::bimodal_curve().total();
    const double closed = 0.5 * base + (15.0 / 30.0) * (1.0 - std::exp(-30.0 * 0.5));
    EXPECT_NEAR(ci.total(), closed, 1e-12);
    EXPECT_NEAR(ci.total(), hawkes_cumulative_oracle(m, tr.times(), 1.0, 1e-5), 1e-6 * closed);
}

TEST(Cumulative, HawkesMatchesQuadratureOnRandomHistories)
{
    CounterRng rng(5);
    const HawkesModel m{ConstantRate{4.0}, 0.5, 6.0, 9.0};
    for (int rep = 0; rep < 20; ++rep) {
        const auto times = random_times(rng, 1 + rep % 7, kUnit);
        const SpikeTrain tr(kUnit, times);
        const auto ci = cumulative(IntensityModel(m), tr);
        for (double t : {0.05, 0.37, 0.81, 1.0}) {
            const double want = hawkes_cumulative_oracle(m, times, t, 1e-4);
            EXPECT_NEAR(ci(t), want, 1e-6 * std::max(1.0, want));
        }
    }
}

TEST(Cumulative, HistoryFreeCallRejectsHistoryDependentModels)
{
    EXPECT_THROW(cumulative(IntensityModel(presets::bimodal_hawkes()), kUnit), ValidationError);
    EXPECT_TRUE(is_history_dependent(IntensityModel(presets::bimodal_hawkes())));
    EXPECT_FALSE(is_history_dependent(IntensityModel(ConstantRate{1.0})));
}

TEST(Cumulative, ZeroMassIsNumericalFailure)
{
    const RateCurve zero(kUnit, {0.0, 1.0}, {0.0, 0.0});
    EXPECT_THROW(cumulative(IntensityModel(zero), kUnit), NumericalError);
}

TEST(Cumulative, MonotoneStartsAtZeroAndInvertsOnEvents)
{
    CounterRng rng(17);
    const std::vector<IntensityModel> models = {
        ConstantRate{3.0}, parabola(), presets::bimodal_curve(), presets::bimodal_hawkes(),
        HawkesModel{ConstantRate{2.0}, 1.0, 1.0, 5.0}};
    for (const auto& model : models) {
        for (int rep = 0; rep < 25; ++rep) {
            const SpikeTrain tr(kUnit, random_times(rng, rep % 12, kUnit));
            const auto ci = cumulative(model, tr);
            EXPECT_EQ(ci(0.0), 0.0);
            double prev = 0.0;
            for (int i = 1; i <= 400; ++i) {
                const double v = ci(i / 400.0);
                EXPECT_GE(v, prev);
                prev = v;
            }
            for (double s : tr.times()) EXPECT_NEAR(inverse_cumulative(ci, ci(s)), s, 1e-8);
        }
    }
}

TEST(TimeRescale, HandExamples)
{
    const SpikeTrain tr(kUnit, {0.1, 0.2});
    const auto id = time_rescale(tr, cumulative(IntensityModel(ConstantRate{1.0}), kUnit));
    EXPECT_DOUBLE_EQ(id[0], 0.1);
    EXPECT_DOUBLE_EQ(id[1], 0.2);

    const auto ten = time_rescale(tr, cumulative(IntensityModel(ConstantRate{10.0}), kUnit));
    EXPECT_DOUBLE_EQ(ten.domain().end(), 10.0);
    EXPECT_NEAR(ten[0], 1.0, 1e-12);
    EXPECT_NEAR(ten[1], 2.0, 1e-12);

    const auto par = time_rescale(SpikeTrain(kUnit, {0.5}), cumulative(IntensityModel(parabola()), kUnit));
    EXPECT_NEAR(par.domain().end(), 8.0, 1e-6);
    EXPECT_NEAR(par[0], 4.0, 1e-6);
}

TEST(Ilr, EqualPartsGiveExactZeros)
{
    for (std::size_t k : {1u, 2u, 5u, 20u, 80u}) {
        const std::vector<double> u(k + 1, 1.0 / static_cast<double>(k + 1));
        for (double v : ilr_transform(u)) EXPECT_EQ(v, 0.0);
        const std::vector<double> w(k + 1, 3.7);
        for (double v : ilr_transform(w)) EXPECT_EQ(v, 0.0);
    }
}

TEST(Ilr, TwoPartsMatchHandValue)
{
    const std::vector<double> u{0.25, 0.75};
    const auto z = ilr_transform(u);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_NEAR(z[0], std::log(0.25 / 0.75) / std::sqrt(2.0), 1e-15);
}

TEST(Ilr, IsometryWithCenteredLogRatio)
{
    CounterRng rng(3);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> u(2 + rep % 30);
        for (auto& v : u) v = rng.exponential();
        const auto z = ilr_transform(u);
        const auto c = clr_transform(u);
        const double nz = std::inner_product(z.begin(), z.end(), z.begin(), 0.0);
        const double nc = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
        EXPECT_NEAR(nz, nc, 1e-10 * std::max(1.0, nc));
        EXPECT_NEAR(std::accumulate(c.begin(), c.end(), 0.0), 0.0, 1e-10);
    }
}

namespace {

// Expected pooled distribution of the spacings that end at an event, for a
// unit-rate Poisson process on [0, L]: count density e^{-y} (1 + L - y).
double edge_corrected_cdf(double x, std::span<const double> windows)
{
    double num = 0.0, den = 0.0;
    for (double L : windows) {
        const double m = std::min(x, L);
        num += (1.0 + L) * (1.0 - std::exp(-m)) - (1.0 - std::exp(-m) - m * std::exp(-m));
        den += L;
    }
    return num / den;
}

double ks_against(std::vector<double> values, const std::function<double(double)>& cdf)
{
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = cdf(values[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

void expect_rescaled_poisson(const TrainSample& sample, const IntensityModel& model)
{
    std::vector<double> spacings, windows;
    for (const auto& tr : sample) {
        const auto ci = cumulative(model, tr);
        auto s = rescaled_spacings(tr, ci);
        s.pop_back();  // the trailing gap is censored by the window end
        spacings.insert(spacings.end(), s.begin(), s.end());
        windows.push_back(ci.total());
    }
    const double d = ks_against(spacings, [&](double x) { return edge_corrected_cdf(x, windows); });
    EXPECT_LT(d, 1.628 / std::sqrt(static_cast<double>(spacings.size())));
}

}  // namespace

TEST(TimeRescale, HomogeneousSampleGivesUnitRateSpacings)
{
    expect_rescaled_poisson(sample_hpp(10.0, kUnit, 500, 21), ConstantRate{10.0});
}

TEST(TimeRescale, InhomogeneousSampleGivesUnitRateSpacings)
{
    const auto curve = RateCurve::tabulate(kUnit, presets::sine_rate);
    expect_rescaled_poisson(sample_ipp(curve, 500, 22), curve);
}

TEST(TimeRescale, HawkesSampleMatchesItsCompensator)
{
    // For a history-dependent model the window Lambda(T2) is random, so compare
    // the count of rescaled gaps <= x with its compensator, the time spent at
    // age <= x; their difference is a martingale.
    const HawkesModel m = presets::bimodal_hawkes();
    const auto sample = sample_hawkes(m, kUnit, 500, 23);
    std::vector<double> gaps, all_gaps;
    for (const auto& tr : sample) {
        const auto s = rescaled_spacings(tr, cumulative(IntensityModel(m), tr));
        gaps.insert(gaps.end(), s.begin(), s.end() - 1);
        all_gaps.insert(all_gaps.end(), s.begin(), s.end());
    }
    std::sort(gaps.begin(), gaps.end());
    const double n = static_cast<double>(gaps.size());
    double worst = 0.0;
    for (double x : gaps) {
        const double count = static_cast<double>(std::upper_bound(gaps.begin(), gaps.end(), x) - gaps.begin());
        double comp = 0.0;
        for (double g : all_gaps) comp += std::min(g, x);
        worst = std::max(worst, std::abs(count - comp) / n);
    }
    // 1% level of sup |Brownian motion| on [0, 1]
    EXPECT_LT(worst, 2.81 / std::sqrt(n));
}

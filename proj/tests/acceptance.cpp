#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "spikedepth/depth.hpp"
#include "spikedepth/harness.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/outlier.hpp"
#include "spikedepth/rng.hpp"
#include "spikedepth/simulate.hpp"
#include "spikedepth/spike_metric.hpp"

using namespace spikedepth;

namespace {

const TimeDomain kUnit(0.0, 1.0);

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

SpikeTrain equispaced(std::size_t k)
{
    std::vector<double> t(k);
    for (std::size_t i = 0; i < k; ++i) t[i] = (i + 1.0) / (k + 1.0);
    return SpikeTrain(kUnit, t);
}

SpikeTrain random_train(CounterRng& rng, std::size_t min_k, std::size_t max_k)
{
    const std::size_t k = min_k + static_cast<std::size_t>(rng() % (max_k - min_k + 1));
    std::vector<double> t(k);
    for (auto& x : t) x = rng.uniform();
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return SpikeTrain(kUnit, t);
}

double fraction(const std::vector<double>& a, const std::vector<double>& b, const std::function<bool(double, double)>& pred)
{
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hits += pred(a[i], b[i]);
    return static_cast<double>(hits) / static_cast<double>(a.size());
}

harness::ExperimentResult run(harness::Experiment id, const std::function<void(harness::ExperimentSpec&)>& tweak = {})
{
    auto spec = harness::ExperimentSpec::defaults(id);
    if (tweak) tweak(spec);
    return harness::run_experiment(spec);
}

Outcome criterion1()
{
    const auto unit = cumulative(IntensityModel(ConstantRate{1.0}), kUnit);
    double worst = 0.0;
    for (std::size_t k : {0u, 1u, 5u, 20u}) {
        const auto tr = equispaced(k);
        worst = std::max(worst, std::fabs(conditional_depth_ilr(tr, unit) - 1.0));
        worst = std::max(worst, std::fabs(conditional_depth_simplified(tr, unit) - 1.0));
    }
    const SpikeTrain one(kUnit, {0.25});
    const double ilr = conditional_depth_ilr(one, unit);
    const double simp = conditional_depth_simplified(one, unit);
    const double g = std::sqrt(0.1875);
    const double want_ilr = 1.0 / (1.0 - std::log(0.75));
    const double want_simp = 1.0 / (1.0 + 0.5 * (std::pow(std::log(0.25 / g), 2) + std::pow(std::log(0.75 / g), 2)));
    // the simplified value is checked against direct substitution into its
    // formula, 0.768204; the rounded 0.8684 sometimes quoted does not follow from it
    const bool pass = worst <= 1e-12 && std::fabs(ilr - want_ilr) <= 1e-6 && std::fabs(simp - want_simp) <= 1e-6 &&
                      std::fabs(ilr - 0.7766) < 5e-5;
    return {pass, fmt("max |D-1| at equal spacings %.3g; k=1 ILR %.6f (hand %.6f), simplified %.6f", worst, ilr,
                      want_ilr, simp) +
                      fmt(" (hand %.6f)", want_simp)};
}

Outcome criterion2()
{
    CounterRng rng(2);
    const auto cm = CardinalityModel::poisson(8.0);
    const std::vector<IntensityModel> models = {ConstantRate{3.0}, presets::bimodal_curve(), presets::bimodal_hawkes()};
    double worst = 0.0;
    for (int pair = 0; pair < 1000; ++pair) {
        const auto& model = models[pair % models.size()];
        const auto tr = random_train(rng, 0, 20);
        const auto ci = cumulative(model, tr);
        const SpikeTrain rescaled = time_rescale(tr, ci);
        const auto unit = cumulative(IntensityModel(ConstantRate{1.0}), rescaled.domain());
        worst = std::max(worst, std::fabs(depth(tr, ci, cm).total - depth(rescaled, unit, cm).total));
    }
    return {worst <= 1e-9, fmt("max depth change under rescaling %.3g over 1000 pairs", worst)};
}

Outcome criterion3()
{
    const std::vector<double> deltas = {0.001, 0.005, 0.01, 0.05};
    SpacingQuantileCache cache(1000000, 3);
    double worst = 0.0;
    for (double d : deltas) {
        const double c1 = std::exp(cache.log_quantile(1, 1.0, d));
        worst = std::max(worst, std::fabs(c1 - (1.0 - (1.0 - d) * (1.0 - d)) / 4.0));
    }
    bool increasing = true;
    for (std::size_t k = 1; k <= 30; ++k) {
        double prev = -1.0;
        for (double d : deltas) {
            const double t = threshold_tk_log(k, 1.0, cache.log_quantile(k, 1.0, d), 1.0);
            increasing = increasing && t > prev;
            prev = t;
        }
    }
    return {worst <= 0.0005 && increasing,
            fmt("max |C1 - closed form| %.3g at n_mc=1e6; t_k increasing for k=1..30: ", worst) +
                (increasing ? "yes" : "no")};
}

Outcome criterion4()
{
    const auto sim1 = run(harness::Experiment::Sim1);
    const auto sim2 = run(harness::Experiment::Sim2);
    bool pass = true;
    double dev = 0.0, shift = 0.0;
    const auto k1 = sim1.column("k_clean");
    const auto d1 = sim1.column("max_dev_truth");
    for (std::size_t i = 0; i < k1.size(); ++i) {
        pass = pass && k1[i] == 10.0 && d1[i] <= 0.02;
        dev = std::max(dev, d1[i]);
    }
    for (const auto* res : {&sim1, &sim2}) {
        const auto a = res->column("k_clean"), b = res->column("k_contaminated"), s = res->column("max_shift");
        for (std::size_t i = 0; i < a.size(); ++i) {
            pass = pass && a[i] == b[i] && s[i] < 0.02;
            shift = std::max(shift, s[i]);
        }
    }
    return {pass, fmt("sim1 k*=10 and max |s_i - i/11| %.4f over 20 seeds; max contamination shift %.4f", dev, shift)};
}

Outcome criterion5()
{
    const auto s3 = run(harness::Experiment::Sim3).stat("f1@0.001").mean;
    const auto s4 = run(harness::Experiment::Sim4).stat("f1@0.005").mean;
    return {s3 >= 0.78 && s3 <= 0.92 && s4 >= 0.67 && s4 <= 0.83,
            fmt("sim3 mean F1 %.4f (delta 0.001); sim4 mean F1 %.4f (delta 0.005)", s3, s4)};
}

Outcome criterion6()
{
    const auto f1 = run(harness::Experiment::Sim5).stat("f1@0.001").mean;
    return {f1 >= 0.65 && f1 <= 0.90, fmt("sim5 mean F1 %.4f (delta 0.001)", f1)};
}

Outcome criterion7()
{
    const auto res = run(harness::Experiment::ClassHppIpp, [](auto& s) { s.remove_outliers = 0.01; });
    const auto dd = res.column("dd"), removed = res.column("dd_removed");
    const double med = res.stat("dd").median, med_removed = res.stat("dd_removed").median;
    const double dec = fraction(removed, dd, std::less<double>());
    const bool pass = med >= 0.08 && med <= 0.14 && med_removed <= med + 0.005 && dec >= 0.6;
    return {pass, fmt("DD median %.4f; after removal %.4f; decreased in %.0f%% of reps", med, med_removed, 100.0 * dec)};
}

Outcome criterion8()
{
    const auto res = run(harness::Experiment::ClassIppHawkes);
    const auto dd = res.column("dd"), md = res.column("md"), ia = res.column("ia");
    const double med = res.stat("dd").median;
    const double md_worse = fraction(md, dd, std::greater<double>());
    const double ia_not_better = fraction(ia, dd, std::greater_equal<double>());
    const bool pass = med >= 0.25 && med <= 0.37 && md_worse >= 0.8 && ia_not_better >= 0.6;
    return {pass, fmt("DD median %.4f; MD > DD in %.0f%%; IA >= DD in %.0f%% of reps", med, 100.0 * md_worse,
                      100.0 * ia_not_better)};
}

Outcome criterion9()
{
    const double med = run(harness::Experiment::DdGauss).stat("dd").median;
    return {med >= 0.17 && med <= 0.24, fmt("monotone-boundary median test error %.4f over 100 reps", med)};
}

double piece(double a, double b)
{
    const double d = std::sqrt(a) - std::sqrt(b);
    return d * d;
}

double brute_force_squared(const SpikeTrain& f, const SpikeTrain& g, double mu)
{
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, std::size_t>> chain;
    auto extend = [&](auto&& self, std::size_t i0, std::size_t j0) -> void {
        double pt = 0.0, ps = 0.0, pen = 0.0;
        for (auto [i, j] : chain) {
            pen += piece(f[i] - pt, g[j] - ps);
            pt = f[i];
            ps = g[j];
        }
        pen += piece(1.0 - pt, 1.0 - ps);
        best = std::min(best, static_cast<double>(f.size() + g.size()) - 2.0 * chain.size() + mu * pen);
        for (std::size_t i = i0; i < f.size(); ++i)
            for (std::size_t j = j0; j < g.size(); ++j) {
                chain.emplace_back(i, j);
                self(self, i + 1, j + 1);
                chain.pop_back();
            }
    };
    extend(extend, 0, 0);
    return best;
}

Outcome criterion10()
{
    CounterRng rng(10);
    double brute = 0.0, asym = 0.0, self = 0.0;
    bool monotone = true;
    for (int pair = 0; pair < 200; ++pair) {
        const auto f = random_train(rng, 0, 4), g = random_train(rng, 0, 4);
        const double d = d_mu(f, g, 20.0);
        brute = std::max(brute, std::fabs(d * d - brute_force_squared(f, g, 20.0)));
    }
    for (int pair = 0; pair < 1000; ++pair) {
        const auto f = random_train(rng, 0, 15), g = random_train(rng, 0, 15);
        asym = std::max(asym, std::fabs(d_mu(f, g, 20.0) - d_mu(g, f, 20.0)));
        self = std::max(self, d_mu(f, f, 20.0));
    }
    for (int pair = 0; pair < 200; ++pair) {
        const auto f = random_train(rng, 0, 15), g = random_train(rng, 0, 15);
        double prev = 0.0;
        for (double mu : {0.0, 5.0, 20.0, 100.0}) {
            const double d = d_mu(f, g, mu);
            monotone = monotone && d >= prev;
            prev = d;
        }
    }
    const bool pass = brute <= 1e-9 && asym <= 1e-12 && self == 0.0 && monotone;
    return {pass, fmt("max |DP - brute force| %.3g; max asymmetry %.3g; max d(f,f) %.3g; ", brute, asym, self) +
                      "monotone in mu: " + (monotone ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Outcome (*)()> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9, criterion10};
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (int i = 1; i <= 11; ++i) ids.push_back(i);
    bool ok = true;
    for (int id : ids) {
        if (id == 11) {
            std::printf("criterion 11: NOT REPRODUCIBLE (real recordings are not available; covered by 1-10)\n");
            continue;
        }
        if (id < 1 || id > 10) {
            std::printf("criterion %d: unknown\n", id);
            ok = false;
            continue;
        }
        const Outcome o = criteria[id - 1]();
        std::printf("criterion %d: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        ok = ok && o.pass;
    }
    return ok ? 0 : 1;
}

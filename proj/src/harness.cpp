#include "spikedepth/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "spikedepth/baselines.hpp"
#include "spikedepth/ddclass.hpp"
#include "spikedepth/error.hpp"
#include "spikedepth/estimation.hpp"
#include "spikedepth/io.hpp"
#include "spikedepth/median.hpp"
#include "spikedepth/outlier.hpp"
#include "spikedepth/rng.hpp"
#include "spikedepth/simulate.hpp"

namespace spikedepth::harness {

namespace {

const TimeDomain kUnit(0.0, 1.0);
constexpr std::size_t kInjected = 10;

// seed roles within one repetition
enum Role : std::uint64_t {
    kBase = 1,
    kContamination,
    kOutliers,
    kTrainF,
    kTrainG,
    kTestF,
    kTestG,
    kImiG,
    kImiGClean,
    kBoundary,
    kBoundaryIa,
    kBoundaryClean,
    kBoundaryIaClean,
};

const std::vector<std::pair<Experiment, const char*>> kNames = {
    {Experiment::Sim1, "sim1"},
    {Experiment::Sim2, "sim2"},
    {Experiment::Sim3, "sim3"},
    {Experiment::Sim4, "sim4"},
    {Experiment::Sim5, "sim5"},
    {Experiment::ClassHppIpp, "class-hpp-ipp"},
    {Experiment::ClassIppHawkes, "class-ipp-hawkes"},
    {Experiment::DdGauss, "dd-gauss"},
};

bool is_detection(Experiment id) { return id == Experiment::Sim3 || id == Experiment::Sim4 || id == Experiment::Sim5; }
bool is_median(Experiment id) { return id == Experiment::Sim1 || id == Experiment::Sim2; }
bool is_classification(Experiment id) { return id == Experiment::ClassHppIpp || id == Experiment::ClassIppHawkes; }

TrainSample embed(const TrainSample& s, const TimeDomain& outer)
{
    std::vector<SpikeTrain> out;
    out.reserve(s.size());
    for (const auto& tr : s) out.emplace_back(outer, std::vector<double>(tr.times().begin(), tr.times().end()));
    return TrainSample(std::move(out));
}

TrainSample subset(const TrainSample& s, const std::vector<bool>& drop)
{
    std::vector<SpikeTrain> keep;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!drop[i]) keep.push_back(s[i]);
    require(!keep.empty(), "outlier removal left an empty training group");
    return TrainSample(std::move(keep));
}

std::string delta_tag(double d) { return io::format_double(d); }

// ---------------------------------------------------------------------------
// median robustness (simulations 1 and 2)

struct MedianStudy {
    std::function<TrainSample(std::size_t, std::uint64_t)> draw;
    std::function<double(double)> true_rate;
};

MedianStudy median_study(Experiment id)
{
    if (id == Experiment::Sim1)
        return {[](std::size_t n, std::uint64_t s) { return sample_hpp(10.0, kUnit, n, s); },
                [](double) { return 10.0; }};
    return {[](std::size_t n, std::uint64_t s) {
                return sample_ipp(RateCurve::tabulate(kUnit, presets::sine_rate), n, s);
            },
            presets::sine_rate};
}

std::vector<double> median_rep(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns)
{
    if (columns) *columns = {"k_clean", "k_contaminated", "max_shift", "max_dev_truth"};
    const MedianStudy study = median_study(spec.id);
    const TrainSample clean = study.draw(spec.train_size, rep_seed(spec.seed, rep, kBase));
    // matched expected count: rate 200 over a window of length 0.05
    const TrainSample extra = embed(sample_hpp(200.0, TimeDomain(0.0, 0.05), kInjected,
                                               rep_seed(spec.seed, rep, kContamination)), kUnit);
    const TrainSample dirty = TrainSample::concat(clean, extra);
    const DepthConfig cfg{spec.r, DepthVariant::Ilr};

    auto median_of = [&](const TrainSample& s) {
        const IntensityModel model = estimate_intensity_kernel(s);
        return estimate_median(s, model, CardinalityModel::empirical(s), cfg);
    };
    const MedianResult a = median_of(clean);
    const MedianResult b = median_of(dirty);

    double shift = 0.0;
    for (std::size_t i = 0; i < std::min(a.cardinality, b.cardinality); ++i)
        shift = std::max(shift, std::abs(a.median[i] - b.median[i]));
    if (a.cardinality != b.cardinality) shift = kUnit.length();

    const auto truth = cumulative(IntensityModel(RateCurve::tabulate(kUnit, study.true_rate)), kUnit);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.cardinality; ++i) {
        const double target = truth.total() * static_cast<double>(i + 1) / static_cast<double>(a.cardinality + 1);
        dev = std::max(dev, std::abs(a.median[i] - truth.inverse(target)));
    }
    return {static_cast<double>(a.cardinality), static_cast<double>(b.cardinality), shift, dev};
}

// ---------------------------------------------------------------------------
// outlier detection (simulations 3 to 5)

struct DetectionContext {
    SpacingQuantileCache cache;
    DetectionContext(std::size_t n_mc, std::uint64_t seed) : cache(n_mc, seed) {}
};

std::uint64_t mc_seed(const ExperimentSpec& spec) { return rep_seed(spec.seed, 0, 0); }

std::vector<double> detection_rep(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns,
                                  SpacingQuantileCache& cache)
{
    if (columns) {
        columns->clear();
        for (double d : spec.deltas)
            for (const char* m : {"precision", "recall", "f1", "flagged"})
                columns->push_back(std::string(m) + "@" + delta_tag(d));
    }
    const std::uint64_t base_seed = rep_seed(spec.seed, rep, kBase);
    TrainSample base = spec.id == Experiment::Sim3 ? sample_hpp(10.0, kUnit, spec.train_size, base_seed)
                       : spec.id == Experiment::Sim4
                           ? sample_ipp(RateCurve::tabulate(kUnit, presets::sine_rate), spec.train_size, base_seed)
                           : sample_hawkes(presets::bimodal_hawkes(), kUnit, spec.train_size, base_seed);

    std::vector<SpikeTrain> injected;
    const CounterRng outlier_root(rep_seed(spec.seed, rep, kOutliers));
    if (spec.id == Experiment::Sim5) {
        const auto tri = RateCurve::tabulate(kUnit, presets::trimodal_rate);
        const auto s = sample_ipp(tri, kInjected, outlier_root.substream(0)());
        injected = s.trains();
    } else {
        // one rate-100 burst in each tenth of the window
        for (std::size_t j = 0; j < kInjected; ++j) {
            const TimeDomain window(static_cast<double>(j) / 10.0, static_cast<double>(j + 1) / 10.0);
            const auto s = sample_hpp(100.0, window, 1, outlier_root.substream(j)());
            injected.emplace_back(kUnit, std::vector<double>(s[0].times().begin(), s[0].times().end()));
        }
    }
    const TrainSample sample = TrainSample::concat(base, TrainSample(std::move(injected)));
    std::vector<bool> truth(sample.size(), false);
    std::fill(truth.end() - kInjected, truth.end(), true);

    IntensityModel model = ConstantRate{1.0};
    if (spec.id == Experiment::Sim5) {
        ImiOptions opts;
        opts.calibration_seed = rep_seed(spec.seed, rep, kImiG);
        model = estimate_intensity_imi(sample, opts);
    } else {
        model = estimate_intensity_kernel(sample);
    }
    const CardinalityModel cm = CardinalityModel::empirical(sample);
    const DepthConfig cfg{spec.r, DepthVariant::Ilr};

    std::vector<double> row;
    for (double delta : spec.deltas) {
        const OutlierOptions opts{delta, spec.n_mc, mc_seed(spec)};
        const auto report = detect_outliers(sample, model, cm, cfg, opts, truth, &cache);
        row.push_back(report.metrics->precision);
        row.push_back(report.metrics->recall);
        row.push_back(report.metrics->f1);
        row.push_back(static_cast<double>(report.flagged_count));
    }
    return row;
}

// ---------------------------------------------------------------------------
// spike-train classification (both studies)

struct ClassErrors {
    double dd, md, lm, mm2, ia;
};

std::vector<Label> group_labels(std::size_t nf, std::size_t ng)
{
    std::vector<Label> l(nf, Label::F);
    l.resize(nf + ng, Label::G);
    return l;
}

double dd_error(const std::vector<DDPoint>& test, const BoundaryFunction& f)
{
    return misclassification_rate(test, f);
}

double md_error(const std::vector<DDPoint>& test)
{
    std::size_t wrong = 0;
    for (const auto& p : test) wrong += classify_md(p.d_f, p.d_g, p.fallback) != p.label;
    return static_cast<double>(wrong) / static_cast<double>(test.size());
}

ClassErrors classify_all(const ExperimentSpec& spec, std::size_t rep, bool cleaned, const TrainSample& train_f,
                         const TrainSample& train_g, const TrainSample& test, const std::vector<Label>& truth)
{
    const bool hawkes = spec.id == Experiment::ClassIppHawkes;
    const DepthConfig cfg{spec.r, DepthVariant::Ilr};
    ImiOptions imi;
    imi.calibration_seed = rep_seed(spec.seed, rep, cleaned ? kImiGClean : kImiG);

    const GroupModel gf = fit_group(train_f, ModelKind::Kernel, imi);
    const GroupModel gg = fit_group(train_g, hawkes ? ModelKind::Imi : ModelKind::Kernel, imi);
    const TrainSample train = TrainSample::concat(train_f, train_g);
    const auto train_labels = group_labels(train_f.size(), train_g.size());

    OptimizerConfig opt;
    opt.degree = spec.degree;
    opt.seed = rep_seed(spec.seed, rep, cleaned ? kBoundaryClean : kBoundary);

    ClassErrors e{};
    const auto train_points = dd_points(train, train_labels, gf, gg, cfg);
    const auto boundary = train_boundary(train_points, opt);
    const auto test_points = dd_points(test, truth, gf, gg, cfg);
    e.dd = dd_error(test_points, boundary.boundary);
    e.md = md_error(test_points);

    const auto lm_f = fit_binned_gaussian(train_f);
    const auto lm_g = fit_binned_gaussian(train_g);
    std::vector<Label> pred(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) pred[i] = classify_lm(test[i], lm_f, lm_g);
    e.lm = error_rate(pred, truth);

    const auto med_f = estimate_median(train_f, history_free_marginal(gf.intensity), gf.cardinality, cfg);
    const auto med_g = estimate_median(train_g, history_free_marginal(gg.intensity), gg.cardinality, cfg);
    for (std::size_t i = 0; i < test.size(); ++i)
        pred[i] = classify_mm2(test[i], med_f.median, med_g.median, spec.mu, gf.mean_count, gg.mean_count);
    e.mm2 = error_rate(pred, truth);

    if (hawkes) {
        // the self-exciting group treated as an inhomogeneous Poisson process
        const GroupModel gg_ia = fit_group(train_g, ModelKind::Kernel, imi);
        const auto ia_train = dd_points(train, train_labels, gf, gg_ia, cfg);
        opt.seed = rep_seed(spec.seed, rep, cleaned ? kBoundaryIaClean : kBoundaryIa);
        const auto ia_boundary = train_boundary(ia_train, opt);
        e.ia = dd_error(dd_points(test, truth, gf, gg_ia, cfg), ia_boundary.boundary);
    } else {
        e.ia = e.dd;
    }
    return e;
}

std::vector<double> classification_rep(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns,
                                       SpacingQuantileCache* cache)
{
    const bool hawkes = spec.id == Experiment::ClassIppHawkes;
    std::vector<std::string> names = {"dd", "md", "lm", "mm2"};
    if (hawkes) names.push_back("ia");
    if (columns) {
        *columns = names;
        if (spec.remove_outliers) {
            for (const auto& n : names) columns->push_back(n + "_removed");
            columns->push_back("removed_f");
            columns->push_back("removed_g");
        }
    }

    auto draw_f = [&](std::size_t n, std::uint64_t s) {
        return hawkes ? sample_ipp(presets::bimodal_curve(), n, s) : sample_hpp(8.0, kUnit, n, s);
    };
    auto draw_g = [&](std::size_t n, std::uint64_t s) {
        return hawkes ? sample_hawkes(presets::bimodal_hawkes(), kUnit, n, s)
                      : sample_ipp(RateCurve::tabulate(kUnit, presets::parabola_rate), n, s);
    };
    const TrainSample train_f = draw_f(spec.train_size, rep_seed(spec.seed, rep, kTrainF));
    const TrainSample train_g = draw_g(spec.train_size, rep_seed(spec.seed, rep, kTrainG));
    const TrainSample test = TrainSample::concat(draw_f(spec.test_size, rep_seed(spec.seed, rep, kTestF)),
                                                 draw_g(spec.test_size, rep_seed(spec.seed, rep, kTestG)));
    const auto truth = group_labels(spec.test_size, spec.test_size);

    auto push = [&](std::vector<double>& row, const ClassErrors& e) {
        row.insert(row.end(), {e.dd, e.md, e.lm, e.mm2});
        if (hawkes) row.push_back(e.ia);
    };
    std::vector<double> row;
    push(row, classify_all(spec, rep, false, train_f, train_g, test, truth));

    if (spec.remove_outliers) {
        const DepthConfig cfg{spec.r, DepthVariant::Ilr};
        const OutlierOptions opts{*spec.remove_outliers, spec.n_mc, mc_seed(spec)};
        ImiOptions imi;
        imi.calibration_seed = rep_seed(spec.seed, rep, kImiG);
        auto flags = [&](const TrainSample& s, ModelKind kind) {
            const GroupModel g = fit_group(s, kind, imi);
            const auto report = detect_outliers(s, g.intensity, g.cardinality, cfg, opts, std::nullopt, cache);
            std::vector<bool> drop(s.size(), false);
            for (std::size_t i : report.flagged_indices()) drop[i] = true;
            return std::make_pair(drop, report.flagged_count);
        };
        const auto [drop_f, nf] = flags(train_f, ModelKind::Kernel);
        const auto [drop_g, ng] = flags(train_g, hawkes ? ModelKind::Imi : ModelKind::Kernel);
        push(row, classify_all(spec, rep, true, subset(train_f, drop_f), subset(train_g, drop_g), test, truth));
        row.push_back(static_cast<double>(nf));
        row.push_back(static_cast<double>(ng));
    }
    return row;
}

// ---------------------------------------------------------------------------
// two-Gaussian illustration

Eigen::MatrixXd gaussian_rows(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov, std::size_t n,
                              std::uint64_t seed)
{
    const Eigen::Matrix2d l = cov.llt().matrixL();
    CounterRng rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::Vector2d z;
        z << normal(rng), normal(rng);
        rows.row(i) = (mean + l * z).transpose();
    }
    return rows;
}

std::vector<double> gauss_rep(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns)
{
    if (columns) *columns = {"dd", "md", "dd_train"};
    const Eigen::Vector2d m1(0.0, 0.0), m2(1.0, 1.0);
    Eigen::Matrix2d s1, s2;
    s1 << 1.0, 1.0, 1.0, 4.0;
    s2 << 0.25, 0.25, 0.25, 1.0;
    const auto train1 = gaussian_rows(m1, s1, spec.train_size, rep_seed(spec.seed, rep, kTrainF));
    const auto train2 = gaussian_rows(m2, s2, spec.train_size, rep_seed(spec.seed, rep, kTrainG));
    const auto test1 = gaussian_rows(m1, s1, spec.test_size, rep_seed(spec.seed, rep, kTestF));
    const auto test2 = gaussian_rows(m2, s2, spec.test_size, rep_seed(spec.seed, rep, kTestG));
    const MahalanobisDepth depth1(train1), depth2(train2);

    auto points = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        std::vector<DDPoint> out;
        for (const auto* rows : {&a, &b}) {
            const Label label = rows == &a ? Label::F : Label::G;
            for (Eigen::Index i = 0; i < rows->rows(); ++i) {
                const Eigen::VectorXd x = rows->row(i).transpose();
                out.push_back(DDPoint{depth1(x), depth2(x), label, Label::F});
            }
        }
        return out;
    };
    OptimizerConfig opt;
    opt.degree = spec.degree;
    opt.seed = rep_seed(spec.seed, rep, kBoundary);
    const auto trained = train_boundary(points(train1, train2), opt);
    const auto test = points(test1, test2);
    return {dd_error(test, trained.boundary), md_error(test), trained.training_error};
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> dispatch(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns,
                             SpacingQuantileCache* cache)
{
    if (is_median(spec.id)) return median_rep(spec, rep, columns);
    if (is_detection(spec.id)) return detection_rep(spec, rep, columns, *cache);
    if (is_classification(spec.id)) return classification_rep(spec, rep, columns, cache);
    return gauss_rep(spec, rep, columns);
}

}  // namespace

Experiment parse_experiment(const std::string& name)
{
    for (const auto& [id, n] : kNames)
        if (name == n) return id;
    throw ValidationError("unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment id)
{
    for (const auto& [e, n] : kNames)
        if (e == id) return n;
    return "unknown";
}

ExperimentSpec ExperimentSpec::defaults(Experiment id)
{
    ExperimentSpec s;
    s.id = id;
    switch (id) {
    case Experiment::Sim1:
    case Experiment::Sim2:
        s.train_size = 500;
        break;
    case Experiment::Sim3:
    case Experiment::Sim4:
    case Experiment::Sim5:
        s.train_size = 1000;
        break;
    case Experiment::ClassHppIpp:
    case Experiment::ClassIppHawkes:
        s.train_size = 500;
        s.test_size = 1000;
        s.deltas = {0.01};
        break;
    case Experiment::DdGauss:
        s.train_size = 200;
        s.test_size = 500;
        s.degree = 2;
        s.reps = 100;
        break;
    }
    return s;
}

void ExperimentSpec::validate() const
{
    require(reps >= 1, "repetitions must be at least 1");
    require(r > 0.0 && std::isfinite(r), "r must be positive");
    require(mu >= 0.0 && std::isfinite(mu), "mu must be non-negative");
    require(train_size >= 2, "training size must be at least 2");
    require(n_mc >= 1, "n_mc must be positive");
    if (is_detection(id)) {
        require(!deltas.empty(), "detection experiments need at least one delta");
        for (double d : deltas) require(d > 0.0 && d < 1.0, "delta must lie in (0, 1)");
    }
    if (remove_outliers) {
        require(is_classification(id), "outlier removal applies to the classification studies");
        require(*remove_outliers > 0.0 && *remove_outliers < 1.0, "removal delta must lie in (0, 1)");
    }
    if (is_classification(id) || id == Experiment::DdGauss) require(test_size >= 1, "test size must be positive");
}

nlohmann::json ExperimentSpec::to_json() const
{
    nlohmann::json j = {{"experiment", experiment_name(id)},
                        {"reps", reps},
                        {"seed", seed},
                        {"deltas", deltas},
                        {"r", r},
                        {"mu", mu},
                        {"degree", degree},
                        {"n_mc", n_mc},
                        {"train_size", train_size},
                        {"test_size", test_size},
                        {"depth", "ilr"}};
    j["remove_outliers"] = remove_outliers ? nlohmann::json(*remove_outliers) : nlohmann::json(nullptr);
    return j;
}

std::uint64_t rep_seed(std::uint64_t base, std::size_t rep, std::uint64_t role)
{
    return CounterRng(base, rep).substream(role)();
}

std::size_t worker_count()
{
    if (const char* env = std::getenv("SPIKEDEPTH_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
        throw ValidationError("SPIKEDEPTH_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> run_repetition(const ExperimentSpec& spec, std::size_t rep, std::vector<std::string>* columns)
{
    spec.validate();
    SpacingQuantileCache cache(spec.n_mc, mc_seed(spec));
    return dispatch(spec, rep, columns, &cache);
}

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    ExperimentResult result{spec, {}, {}};
    SpacingQuantileCache cache(spec.n_mc, mc_seed(spec));
    // column names come from the first repetition, run before the pool starts
    std::vector<double> first = dispatch(spec, 0, &result.columns, &cache);
    auto rest = parallel_map<std::vector<double>>(spec.reps - 1, worker_count(),
                                                  [&](std::size_t i) { return dispatch(spec, i + 1, nullptr, &cache); });
    result.rows.push_back(std::move(first));
    for (auto& r : rest) result.rows.push_back(std::move(r));
    return result;
}

std::vector<double> ExperimentResult::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    require(it != columns.end(), "no result column '" + name + "'");
    const auto c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

std::vector<ExperimentResult::Stat> ExperimentResult::summary() const
{
    std::vector<Stat> out;
    for (const auto& name : columns) {
        const auto v = column(name);
        const double n = static_cast<double>(v.size());
        double mean = 0.0;
        for (double x : v) mean += x / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out.push_back(Stat{name, mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0, median_of(v)});
    }
    return out;
}

ExperimentResult::Stat ExperimentResult::stat(const std::string& name) const
{
    for (const auto& s : summary())
        if (s.column == name) return s;
    throw ValidationError("no result column '" + name + "'");
}

std::string reps_csv(const ExperimentResult& result)
{
    std::ostringstream out;
    out << "rep";
    for (const auto& c : result.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        out << i;
        for (double v : result.rows[i]) out << ',' << io::format_double(v);
        out << '\n';
    }
    return out.str();
}

std::string summary_csv(const ExperimentResult& result)
{
    std::ostringstream out;
    out << "metric,mean,sd,median\n";
    for (const auto& s : result.summary())
        out << s.column << ',' << io::format_double(s.mean) << ',' << io::format_double(s.sd) << ','
            << io::format_double(s.median) << '\n';
    return out.str();
}

void write_result(const ExperimentResult& result)
{
    const std::filesystem::path dir(result.spec.output_dir);
    std::filesystem::create_directories(dir);
    const std::string stem = experiment_name(result.spec.id);
    io::write_text((dir / (stem + "_reps.csv")).string(), reps_csv(result));
    io::write_text((dir / (stem + "_summary.csv")).string(), summary_csv(result));

    nlohmann::json j = {{"config", result.spec.to_json()}, {"columns", result.columns}};
    for (const auto& s : result.summary()) j["summary"][s.column] = {{"mean", s.mean}, {"sd", s.sd}, {"median", s.median}};
    io::write_text((dir / (stem + ".json")).string(), j.dump(2) + "\n");
}

}  // namespace spikedepth::harness

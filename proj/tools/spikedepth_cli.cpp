// spikedepth: simulate spike trains, score depths, find medians and outliers,
// classify groups and rerun the simulation studies.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spikedepth/baselines.hpp"
#include "spikedepth/ddclass.hpp"
#include "spikedepth/error.hpp"
#include "spikedepth/estimation.hpp"
#include "spikedepth/harness.hpp"
#include "spikedepth/io.hpp"
#include "spikedepth/median.hpp"
#include "spikedepth/outlier.hpp"
#include "spikedepth/simulate.hpp"

using namespace spikedepth;

namespace {

struct ModelArgs {
    std::string fit = "kernel";
    std::string model_file;
    std::string save_model;
    std::uint64_t imi_seed = ImiOptions{}.calibration_seed;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--fit", fit, "Estimate the model from the trains: kernel or imi")
            ->check(CLI::IsMember({"kernel", "imi"}));
        cmd->add_option("--model", model_file, "Use a declared model (JSON) instead of fitting");
        cmd->add_option("--save-model", save_model, "Write the fitted model as JSON");
        cmd->add_option("--imi-seed", imi_seed, "Seed of the IMI calibration runs");
    }

    IntensityModel resolve(const TrainSample& sample) const
    {
        IntensityModel model = ConstantRate{1.0};
        if (!model_file.empty()) {
            std::ifstream in(model_file);
            if (!in) throw ValidationError("cannot open model file '" + model_file + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
            }
            model = io::model_from_json(j);
        } else if (fit == "imi") {
            ImiOptions opts;
            opts.calibration_seed = imi_seed;
            model = estimate_intensity_imi(sample, opts);
        } else {
            model = estimate_intensity_kernel(sample);
        }
        if (!save_model.empty()) io::write_text(save_model, io::model_to_json(model).dump() + "\n");
        return model;
    }
};

struct DepthArgs {
    double r = 1.0;
    std::string variant = "ilr";

    void add(CLI::App* cmd)
    {
        cmd->add_option("--r", r, "Exponent of the cardinality weight")->check(CLI::PositiveNumber);
        cmd->add_option("--variant", variant, "Conditional depth: ilr or simplified")
            ->check(CLI::IsMember({"ilr", "simplified"}));
    }
    DepthConfig config() const { return {r, variant == "ilr" ? DepthVariant::Ilr : DepthVariant::Simplified}; }
};

io::TrainFile load(const std::string& path)
{
    auto file = io::read_trains(path);
    if (file.perturbed > 0) std::cerr << "note: perturbed " << file.perturbed << " tied event time(s) by 1e-9\n";
    return file;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    fn(out);
}

std::pair<std::string, std::string> pick_groups(const TrainSample& s, std::string f, std::string g)
{
    require(s.has_labels(), "classification needs a labelled training file");
    std::vector<std::string> seen;
    for (const auto& l : s.labels())
        if (std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
    if (f.empty() && !seen.empty()) f = seen[0];
    if (g.empty())
        for (const auto& l : seen)
            if (l != f) {
                g = l;
                break;
            }
    require(!f.empty() && !g.empty() && f != g, "training file must contain two groups");
    return {f, g};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Depth-based statistics for spike trains"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate trains from a point process");
    std::string sim_kind = "hpp", sim_shape = "sine", sim_out, sim_label, sim_model;
    double sim_rate = 10.0, sim_start = 0.0, sim_end = 1.0, sim_alpha = 15.0, sim_beta = 30.0;
    std::size_t sim_n = 100;
    std::uint64_t sim_seed = 1;
    sim->add_option("process", sim_kind, "hpp, ipp or hawkes")->check(CLI::IsMember({"hpp", "ipp", "hawkes"}));
    sim->add_option("-n,--trains", sim_n, "Number of trains")->check(CLI::PositiveNumber);
    sim->add_option("--rate", sim_rate, "HPP rate");
    sim->add_option("--shape", sim_shape, "IPP intensity: sine, parabola, bimodal or trimodal")
        ->check(CLI::IsMember({"sine", "parabola", "bimodal", "trimodal"}));
    sim->add_option("--model", sim_model, "Sample from a model JSON instead (curve, hawkes or imi)");
    sim->add_option("--alpha", sim_alpha, "Hawkes jump size");
    sim->add_option("--beta", sim_beta, "Hawkes decay rate");
    sim->add_option("--start", sim_start, "Window start");
    sim->add_option("--end", sim_end, "Window end");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--label", sim_label, "Label written on every train");
    sim->add_option("-o,--out", sim_out, "Output train file (default stdout)");

    // depth
    auto* dep = app.add_subcommand("depth", "Depth of every train in a file");
    std::string dep_in, dep_out;
    ModelArgs dep_model;
    DepthArgs dep_cfg;
    dep->add_option("trains", dep_in, "Train file")->required();
    dep->add_option("-o,--out", dep_out, "CSV output (default stdout)");
    dep_model.add(dep);
    dep_cfg.add(dep);

    // median
    auto* med = app.add_subcommand("median", "Median train of a sample");
    std::string med_in, med_json, med_trains;
    ModelArgs med_model;
    DepthArgs med_cfg;
    med->add_option("trains", med_in, "Train file")->required();
    med->add_option("--json", med_json, "JSON output (default stdout)");
    med->add_option("--trains-out", med_trains, "Write the median as a one-train file");
    med_model.add(med);
    med_cfg.add(med);

    // detect
    auto* det = app.add_subcommand("detect", "Flag outlying trains");
    std::string det_in, det_csv, det_json, det_truth;
    double det_delta = 0.01;
    std::size_t det_nmc = OutlierOptions{}.n_mc;
    std::uint64_t det_seed = OutlierOptions{}.seed;
    ModelArgs det_model;
    DepthArgs det_cfg;
    det->add_option("trains", det_in, "Train file")->required();
    det->add_option("--delta", det_delta, "Quantile level of the thresholds")->check(CLI::Range(0.0, 1.0));
    det->add_option("--n-mc", det_nmc, "Monte-Carlo draws per cardinality")->check(CLI::PositiveNumber);
    det->add_option("--seed", det_seed, "Monte-Carlo seed");
    det->add_option("--truth-label", det_truth, "Label marking the known outliers, for precision and recall");
    det->add_option("--csv", det_csv, "Per-train CSV (default stdout)");
    det->add_option("--json", det_json, "JSON summary");
    det_model.add(det);
    det_cfg.add(det);

    // classify
    auto* cls = app.add_subcommand("classify", "Train a two-group classifier and apply it");
    std::string cls_train, cls_test, cls_method = "dd", cls_f, cls_g, cls_kind_f = "kernel", cls_kind_g = "kernel",
                                      cls_dir = ".";
    std::optional<double> cls_remove;
    std::size_t cls_nmc = OutlierOptions{}.n_mc;
    double cls_mu = 20.0;
    std::size_t cls_bins = 10;
    OptimizerConfig cls_opt;
    DepthArgs cls_cfg;
    cls->add_option("train", cls_train, "Labelled training file")->required();
    cls->add_option("test", cls_test, "Test file; its labels, if any, are used to report the error")->required();
    cls->add_option("--method", cls_method, "dd, md, lm, mm2 or ia")
        ->check(CLI::IsMember({"dd", "md", "lm", "mm2", "ia"}));
    cls->add_option("--group-f", cls_f, "Label of group F (default: first label seen)");
    cls->add_option("--group-g", cls_g, "Label of group G (default: second label seen)");
    cls->add_option("--model-f", cls_kind_f, "kernel or imi")->check(CLI::IsMember({"kernel", "imi"}));
    cls->add_option("--model-g", cls_kind_g, "kernel or imi")->check(CLI::IsMember({"kernel", "imi"}));
    cls->add_option("--remove-outliers", cls_remove, "Drop training outliers at this delta and retrain")
        ->check(CLI::Range(0.0, 1.0));
    cls->add_option("--n-mc", cls_nmc, "Monte-Carlo draws for outlier removal")->check(CLI::PositiveNumber);
    cls->add_option("--mu", cls_mu, "Penalty of the d_mu distance (mm2)");
    cls->add_option("--degree", cls_opt.degree, "Degree of the log-derivative polynomial");
    cls->add_option("--seed", cls_opt.seed, "Optimizer seed");
    cls->add_flag("--fixed-noise", cls_opt.fixed_noise, "Draw the optimizer perturbation once instead of every step");
    cls->add_option("--bins", cls_bins, "Count bins of the likelihood method (lm)")->check(CLI::PositiveNumber);
    cls->add_option("--out-dir", cls_dir, "Directory for decisions, DD points and boundary");
    cls_cfg.add(cls);

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "Run a simulation study end to end");
    std::string rep_id, rep_dir = "results";
    std::optional<std::size_t> rep_reps, rep_nmc, rep_train, rep_test, rep_degree;
    std::optional<std::uint64_t> rep_seed;
    std::optional<double> rep_remove, rep_mu, rep_r;
    std::vector<double> rep_deltas;
    rep->add_option("experiment", rep_id, "sim1..sim5, class-hpp-ipp, class-ipp-hawkes or dd-gauss")->required();
    rep->add_option("--reps", rep_reps, "Repetitions")->check(CLI::PositiveNumber);
    rep->add_option("--seed", rep_seed, "Base seed");
    rep->add_option("--delta", rep_deltas, "Detection delta (repeatable)");
    rep->add_option("--remove-outliers", rep_remove, "Outlier-removal delta for the classification studies");
    rep->add_option("--n-mc", rep_nmc, "Monte-Carlo draws per cardinality");
    rep->add_option("--mu", rep_mu, "Penalty of the d_mu distance");
    rep->add_option("--r", rep_r, "Exponent of the cardinality weight");
    rep->add_option("--degree", rep_degree, "Boundary polynomial degree");
    rep->add_option("--train-size", rep_train, "Training (or base) sample size per group");
    rep->add_option("--test-size", rep_test, "Test sample size per group");
    rep->add_option("--out-dir", rep_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const TimeDomain dom(sim_start, sim_end);
            TrainSample out({SpikeTrain(dom, {})});
            if (!sim_model.empty()) {
                std::ifstream in(sim_model);
                if (!in) throw ValidationError("cannot open model file '" + sim_model + "'");
                const auto model = io::model_from_json(nlohmann::json::parse(in));
                if (const auto* c = std::get_if<RateCurve>(&model))
                    out = sample_ipp(*c, sim_n, sim_seed);
                else if (const auto* h = std::get_if<HawkesModel>(&model))
                    out = sample_hawkes(*h, dom, sim_n, sim_seed);
                else if (const auto* m = std::get_if<ImiGrid>(&model))
                    out = sample_imi(*m, sim_n, sim_seed);
                else
                    out = sample_hpp(std::get<ConstantRate>(model).rate, dom, sim_n, sim_seed);
            } else if (sim_kind == "hpp") {
                out = sample_hpp(sim_rate, dom, sim_n, sim_seed);
            } else {
                const std::map<std::string, double (*)(double)> shapes = {{"sine", presets::sine_rate},
                                                                          {"parabola", presets::parabola_rate},
                                                                          {"bimodal", presets::bimodal_rate},
                                                                          {"trimodal", presets::trimodal_rate}};
                const auto curve = RateCurve::tabulate(dom, shapes.at(sim_shape));
                if (sim_kind == "ipp")
                    out = sample_ipp(curve, sim_n, sim_seed);
                else
                    out = sample_hawkes(HawkesModel{curve, 0.5, sim_alpha, sim_beta}, dom, sim_n, sim_seed);
            }
            if (!sim_label.empty())
                out = TrainSample(out.trains(), std::vector<std::string>(out.size(), sim_label));
            with_output(sim_out, [&](std::ostream& o) { io::write_trains(o, out); });
        } else if (*dep) {
            const auto file = load(dep_in);
            const auto model = dep_model.resolve(file.sample);
            const auto scores = depth_all(file.sample, model, CardinalityModel::empirical(file.sample), dep_cfg.config());
            with_output(dep_out, [&](std::ostream& o) { io::write_depth_csv(o, scores); });
        } else if (*med) {
            const auto file = load(med_in);
            const auto model = med_model.resolve(file.sample);
            const auto m = estimate_median(file.sample, history_free_marginal(model),
                                           CardinalityModel::empirical(file.sample), med_cfg.config());
            with_output(med_json, [&](std::ostream& o) { o << io::median_to_json(m).dump(2) << '\n'; });
            if (!med_trains.empty()) io::write_trains(med_trains, TrainSample({m.median}));
        } else if (*det) {
            const auto file = load(det_in);
            const auto model = det_model.resolve(file.sample);
            std::optional<std::vector<bool>> truth;
            if (!det_truth.empty()) {
                require(file.sample.has_labels(), "--truth-label needs a labelled train file");
                truth.emplace();
                for (const auto& l : file.sample.labels()) truth->push_back(l == det_truth);
            }
            const auto report = detect_outliers(file.sample, model, CardinalityModel::empirical(file.sample),
                                                det_cfg.config(), OutlierOptions{det_delta, det_nmc, det_seed}, truth);
            with_output(det_csv, [&](std::ostream& o) { io::write_outlier_csv(o, report); });
            if (!det_json.empty()) io::write_text(det_json, io::outlier_summary_json(report).dump(2) + "\n");
        } else if (*cls) {
            const auto train = load(cls_train).sample;
            const auto test = load(cls_test).sample;
            const auto [name_f, name_g] = pick_groups(train, cls_f, cls_g);
            TrainSample tf = train.with_label(name_f);
            TrainSample tg = train.with_label(name_g);
            const auto kind = [](const std::string& k) { return k == "imi" ? ModelKind::Imi : ModelKind::Kernel; };
            ModelKind kf = kind(cls_kind_f), kg = kind(cls_kind_g);
            if (cls_method == "ia") kf = kg = ModelKind::Kernel;
            const DepthConfig cfg = cls_cfg.config();

            std::size_t removed_f = 0, removed_g = 0;
            if (cls_remove) {
                const OutlierOptions opts{*cls_remove, cls_nmc, OutlierOptions{}.seed};
                auto clean = [&](const TrainSample& s, ModelKind k, std::size_t& removed) {
                    const auto g = fit_group(s, k);
                    const auto report = detect_outliers(s, g.intensity, g.cardinality, cfg, opts);
                    std::vector<SpikeTrain> keep;
                    for (std::size_t i = 0; i < s.size(); ++i)
                        if (!report.verdicts[i].flagged) keep.push_back(s[i]);
                    removed = report.flagged_count;
                    require(!keep.empty(), "outlier removal left an empty training group");
                    return TrainSample(std::move(keep));
                };
                tf = clean(tf, kf, removed_f);
                tg = clean(tg, kg, removed_g);
            }

            std::vector<Label> pred(test.size());
            std::filesystem::create_directories(cls_dir);
            const std::string dir = cls_dir + "/";
            if (cls_method == "lm") {
                const auto f = fit_binned_gaussian(tf, cls_bins), g = fit_binned_gaussian(tg, cls_bins);
                for (std::size_t i = 0; i < test.size(); ++i) pred[i] = classify_lm(test[i], f, g);
            } else {
                const auto gf = fit_group(tf, kf), gg = fit_group(tg, kg);
                if (cls_method == "mm2") {
                    const auto mf = estimate_median(tf, history_free_marginal(gf.intensity), gf.cardinality, cfg);
                    const auto mg = estimate_median(tg, history_free_marginal(gg.intensity), gg.cardinality, cfg);
                    for (std::size_t i = 0; i < test.size(); ++i)
                        pred[i] = classify_mm2(test[i], mf.median, mg.median, cls_mu, gf.mean_count, gg.mean_count);
                } else {
                    const std::vector<Label> none(test.size(), Label::F);
                    const auto test_points = dd_points(test, none, gf, gg, cfg);
                    BoundaryFunction boundary = BoundaryFunction::identity(cls_opt.degree);
                    if (cls_method != "md") {
                        const TrainSample both = TrainSample::concat(tf, tg);
                        std::vector<Label> labels(tf.size(), Label::F);
                        labels.resize(both.size(), Label::G);
                        const auto train_points = dd_points(both, labels, gf, gg, cfg);
                        boundary = train_boundary(train_points, cls_opt).boundary;
                        with_output(dir + "dd_train.csv", [&](std::ostream& o) { io::write_dd_points_csv(o, train_points); });
                    }
                    for (std::size_t i = 0; i < test.size(); ++i)
                        pred[i] = classify_dd(test_points[i].d_f, test_points[i].d_g, boundary, test_points[i].fallback);
                    with_output(dir + "dd_test.csv", [&](std::ostream& o) { io::write_dd_points_csv(o, test_points); });
                    with_output(dir + "boundary.csv", [&](std::ostream& o) { io::write_boundary_csv(o, boundary); });
                }
            }

            std::vector<Label> truth;
            if (test.has_labels()) {
                truth.reserve(test.size());
                for (const auto& l : test.labels()) {
                    require(l == name_f || l == name_g, "test label '" + l + "' is not a training group");
                    truth.push_back(l == name_f ? Label::F : Label::G);
                }
            }
            with_output(dir + "decisions.csv", [&](std::ostream& o) { io::write_decisions_csv(o, pred, truth); });
            nlohmann::json summary = {{"method", cls_method},
                                      {"group_f", name_f},
                                      {"group_g", name_g},
                                      {"train_f", tf.size()},
                                      {"train_g", tg.size()},
                                      {"removed_f", removed_f},
                                      {"removed_g", removed_g},
                                      {"test", test.size()}};
            if (!truth.empty()) summary["error"] = error_rate(pred, truth);
            std::cout << summary.dump(2) << '\n';
        } else if (*rep) {
            auto spec = harness::ExperimentSpec::defaults(harness::parse_experiment(rep_id));
            if (rep_reps) spec.reps = *rep_reps;
            if (rep_seed) spec.seed = *rep_seed;
            if (!rep_deltas.empty()) spec.deltas = rep_deltas;
            if (rep_remove) spec.remove_outliers = rep_remove;
            if (rep_nmc) spec.n_mc = *rep_nmc;
            if (rep_mu) spec.mu = *rep_mu;
            if (rep_r) spec.r = *rep_r;
            if (rep_degree) spec.degree = *rep_degree;
            if (rep_train) spec.train_size = *rep_train;
            if (rep_test) spec.test_size = *rep_test;
            spec.output_dir = rep_dir;
            const auto result = harness::run_experiment(spec);
            harness::write_result(result);
            std::cout << harness::summary_csv(result);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

#include "spikedepth/ddclass.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "spikedepth/error.hpp"
#include "spikedepth/rng.hpp"

namespace spikedepth {

namespace {

// exponent clamp keeping f finite for runaway coefficients
constexpr double kMaxExponent = 30.0;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GroupScorer {
    const GroupModel& group;
    std::optional<CumulativeIntensity> shared;

    GroupScorer(const GroupModel& g, const TimeDomain& domain) : group(g)
    {
        if (!is_history_dependent(g.intensity)) shared.emplace(cumulative(g.intensity, domain));
    }

    double operator()(const SpikeTrain& tr, const DepthConfig& cfg) const
    {
        if (shared) return depth(tr, *shared, group.cardinality, cfg).total;
        return depth(tr, group.intensity, group.cardinality, cfg).total;
    }
};

}  // namespace

GroupModel fit_group(const TrainSample& sample, ModelKind kind, const ImiOptions& imi)
{
    IntensityModel model = kind == ModelKind::Kernel ? IntensityModel(estimate_intensity_kernel(sample, imi.marginal))
                                                     : IntensityModel(estimate_intensity_imi(sample, imi));
    return GroupModel{std::move(model), CardinalityModel::empirical(sample), sample.mean_cardinality()};
}

Label cardinality_fallback(std::size_t k, double mean_f, double mean_g)
{
    const double kd = static_cast<double>(k);
    return std::abs(kd - mean_g) < std::abs(kd - mean_f) ? Label::G : Label::F;
}

DDPoint dd_point(const SpikeTrain& train, Label label, const GroupModel& f, const GroupModel& g,
                 const DepthConfig& cfg)
{
    return DDPoint{depth(train, f.intensity, f.cardinality, cfg).total,
                   depth(train, g.intensity, g.cardinality, cfg).total, label,
                   cardinality_fallback(train.size(), f.mean_count, g.mean_count)};
}

std::vector<DDPoint> dd_points(const TrainSample& trains, std::span<const Label> labels, const GroupModel& f,
                               const GroupModel& g, const DepthConfig& cfg)
{
    require(labels.size() == trains.size(), "one label per train is required");
    const GroupScorer score_f(f, trains.domain());
    const GroupScorer score_g(g, trains.domain());
    std::vector<DDPoint> out;
    out.reserve(trains.size());
    for (std::size_t i = 0; i < trains.size(); ++i) {
        const auto& tr = trains[i];
        out.push_back(DDPoint{score_f(tr, cfg), score_g(tr, cfg), labels[i],
                              cardinality_fallback(tr.size(), f.mean_count, g.mean_count)});
    }
    return out;
}

std::vector<DDPoint> dd_plot(const TrainSample& f, const TrainSample& g, ModelKind kind_f, ModelKind kind_g,
                             const DepthConfig& cfg)
{
    const GroupModel gf = fit_group(f, kind_f);
    const GroupModel gg = fit_group(g, kind_g);
    const TrainSample both = TrainSample::concat(f, g);
    std::vector<Label> labels(f.size(), Label::F);
    labels.resize(both.size(), Label::G);
    return dd_points(both, labels, gf, gg, cfg);
}

// ---------------------------------------------------------------------------
// BoundaryFunction

BoundaryFunction::BoundaryFunction(std::vector<double> coefficients) : coef_(std::move(coefficients))
{
    require(!coef_.empty(), "boundary needs at least one coefficient");
    for (double a : coef_) require(std::isfinite(a), "boundary coefficients must be finite");
    identity_ = std::all_of(coef_.begin(), coef_.end(), [](double a) { return a == 0.0; });

    const std::size_t cols = coef_.size() + 1;
    const std::size_t n = kGridPoints;
    const double step = 1.0 / static_cast<double>(n - 1);
    integrand_.assign(n * cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = static_cast<double>(j) * step;
        const double e = std::exp(h(x));
        integrand_[j * cols] = e;
        double xp = 1.0;
        for (std::size_t c = 1; c < cols; ++c) {
            integrand_[j * cols + c] = xp * e;
            xp *= x;
        }
    }
    // three-point rule per cell pair: exact for quadratic integrands
    table_.assign(n * cols, 0.0);
    for (std::size_t j = 0; j + 2 < n; j += 2) {
        const double* f0 = &integrand_[j * cols];
        const double* f1 = &integrand_[(j + 1) * cols];
        const double* f2 = &integrand_[(j + 2) * cols];
        const bool simpson_half = 5.0 * f0[0] + 8.0 * f1[0] - f2[0] > 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double base = table_[j * cols + c];
            table_[(j + 1) * cols + c] = base + (simpson_half ? step / 12.0 * (5.0 * f0[c] + 8.0 * f1[c] - f2[c])
                                                              : 0.5 * step * (f0[c] + f1[c]));
            table_[(j + 2) * cols + c] = base + step / 3.0 * (f0[c] + 4.0 * f1[c] + f2[c]);
        }
    }
}

BoundaryFunction BoundaryFunction::identity(std::size_t degree)
{
    return BoundaryFunction(std::vector<double>(degree + 1, 0.0));
}

double BoundaryFunction::h(double x) const
{
    double v = 0.0;
    for (std::size_t i = coef_.size(); i-- > 0;) v = v * x + coef_[i];
    return std::clamp(v, -kMaxExponent, kMaxExponent);
}

double BoundaryFunction::value_and_gradient(double t, std::span<double> grad) const
{
    require(grad.empty() || grad.size() == coef_.size(), "gradient buffer has the wrong size");
    if (identity_ && grad.empty()) return t;
    const std::size_t cols = coef_.size() + 1;
    const std::size_t n = kGridPoints;
    const double step = 1.0 / static_cast<double>(n - 1);
    const double tc = std::clamp(t, 0.0, 1.0);
    const std::size_t j = std::min(static_cast<std::size_t>(tc / step), n - 2);
    const double x0 = static_cast<double>(j) * step;
    const double dx = tc - x0;
    const double e = std::exp(h(tc));

    // partial-cell trapezoid, scaled so the value is continuous at both nodes
    auto column = [&](std::size_t c, double integrand_t) {
        const double lo = table_[j * cols + c];
        const double hi = table_[(j + 1) * cols + c];
        const double a = integrand_[j * cols + c];
        const double b = integrand_[(j + 1) * cols + c];
        const double full = 0.5 * step * (a + b);
        const double part = 0.5 * dx * (a + integrand_t);
        return full != 0.0 ? lo + (hi - lo) * (part / full) : lo;
    };

    const double value = (identity_ ? tc : column(0, e)) + (t > 1.0 ? (t - 1.0) * e : 0.0);
    double xp = 1.0;
    for (std::size_t c = 1; c < cols && !grad.empty(); ++c) {
        grad[c - 1] = column(c, xp * e);
        xp *= tc;
    }
    return value;
}

double BoundaryFunction::operator()(double t) const { return value_and_gradient(t, {}); }

// ---------------------------------------------------------------------------
// objectives and training

Label classify_dd(double d_f, double d_g, const BoundaryFunction& f, Label fallback)
{
    const double v = f(d_f);
    if (v > d_g) return Label::F;
    if (v < d_g) return Label::G;
    return fallback;
}

Label classify_md(double d_f, double d_g, Label fallback)
{
    if (d_f > d_g) return Label::F;
    if (d_f < d_g) return Label::G;
    return fallback;
}

Label classify_dd(const SpikeTrain& train, const GroupModel& gf, const GroupModel& gg, const BoundaryFunction& f,
                  const DepthConfig& cfg)
{
    const DDPoint p = dd_point(train, Label::F, gf, gg, cfg);
    return classify_dd(p.d_f, p.d_g, f, p.fallback);
}

Label classify_md(const SpikeTrain& train, const GroupModel& gf, const GroupModel& gg, const DepthConfig& cfg)
{
    const DDPoint p = dd_point(train, Label::F, gf, gg, cfg);
    return classify_md(p.d_f, p.d_g, p.fallback);
}

double misclassification_rate(std::span<const DDPoint> points, const BoundaryFunction& f)
{
    if (points.empty()) return 0.0;
    std::size_t wrong = 0;
    for (const auto& p : points)
        if (classify_dd(p.d_f, p.d_g, f, p.fallback) != p.label) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(points.size());
}

double smoothed_misclassification(std::span<const DDPoint> points, const BoundaryFunction& f, double steepness,
                                  std::span<double> grad)
{
    std::fill(grad.begin(), grad.end(), 0.0);
    if (points.empty()) return 0.0;
    std::vector<double> df(f.coefficients().size());
    double total = 0.0;
    for (const auto& p : points) {
        const double v = grad.empty() ? f(p.d_f) : f.value_and_gradient(p.d_f, df);
        // F is wrong when d_G > f(d_F); G is wrong when d_G < f(d_F)
        const double sign = p.label == Label::F ? 1.0 : -1.0;
        const double s = logistic(sign * steepness * (p.d_g - v));
        total += s;
        if (!grad.empty()) {
            const double coef = -sign * steepness * s * (1.0 - s);
            for (std::size_t i = 0; i < df.size(); ++i) grad[i] += coef * df[i];
        }
    }
    const double n = static_cast<double>(points.size());
    for (double& g : grad) g /= n;
    return total / n;
}

TrainedBoundary train_boundary(std::span<const DDPoint> points, const OptimizerConfig& cfg)
{
    require(cfg.learning_rate > 0.0 && cfg.tolerance > 0.0 && cfg.steepness > 0.0 && cfg.temperature >= 0.0,
            "optimizer settings must be positive");
    require(cfg.anneal > 0.0 && cfg.anneal < 1.0, "annealing factor must lie in (0, 1)");
    const bool has_f = std::any_of(points.begin(), points.end(), [](const DDPoint& p) { return p.label == Label::F; });
    const bool has_g = std::any_of(points.begin(), points.end(), [](const DDPoint& p) { return p.label == Label::G; });
    require(has_f && has_g, "boundary training needs points from both groups");

    const std::size_t p = cfg.degree + 1;
    TrainedBoundary best{BoundaryFunction::identity(cfg.degree), 0.0, 0, true};
    best.training_error = misclassification_rate(points, best.boundary);

    const CounterRng root(cfg.seed);
    std::vector<double> grad(p), z(p);
    bool all_converged = true;
    for (std::size_t run = 0; run < cfg.restarts; ++run) {
        auto rng = root.substream(run);
        std::normal_distribution<double> normal;
        std::vector<double> a(p, 0.0);
        double temperature = cfg.temperature;
        for (auto& v : z) v = normal(rng);
        bool converged = false;
        std::size_t it = 0;
        while (it < cfg.max_iterations) {
            ++it;
            smoothed_misclassification(points, BoundaryFunction(a), cfg.steepness, grad);
            if (!cfg.fixed_noise && it > 1)
                for (auto& v : z) v = normal(rng);
            const double noise = std::sqrt(cfg.learning_rate * temperature);
            double step2 = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                const double delta = -cfg.learning_rate * grad[i] + noise * z[i];
                a[i] += delta;
                step2 += delta * delta;
            }
            temperature *= cfg.anneal;
            if (std::sqrt(step2) < cfg.tolerance) {
                converged = true;
                break;
            }
        }
        all_converged = all_converged && converged;
        BoundaryFunction candidate(a);
        const double err = misclassification_rate(points, candidate);
        if (err < best.training_error) best = TrainedBoundary{std::move(candidate), err, it, converged};
    }
    best.converged = best.converged && all_converged;
    return best;
}

double error_rate(std::span<const Label> predicted, std::span<const Label> truth)
{
    require(predicted.size() == truth.size(), "prediction and truth differ in length");
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

MahalanobisDepth::MahalanobisDepth(const Eigen::MatrixXd& rows)
{
    require(rows.rows() > rows.cols(), "Mahalanobis depth needs more points than dimensions");
    mean_ = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - mean_.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
    chol_.compute(cov);
    if (chol_.info() != Eigen::Success) throw NumericalError("sample covariance is not positive definite");
}

double MahalanobisDepth::operator()(const Eigen::VectorXd& x) const
{
    const Eigen::VectorXd z = chol_.matrixL().solve(x - mean_);
    return 1.0 / (1.0 + z.squaredNorm());
}

}  // namespace spikedepth

#include <gtest/gtest.h>

#include <cmath>

#include "spikedepth/ddclass.hpp"
#include "spikedepth/error.hpp"
#include "spikedepth/rng.hpp"
#include "spikedepth/simulate.hpp"

using namespace spikedepth;

namespace {

const TimeDomain kUnit(0.0, 1.0);

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<DDPoint> random_points(std::uint64_t seed, std::size_t n)
{
    CounterRng rng(seed);
    std::vector<DDPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const Label l = i % 2 ? Label::G : Label::F;
        const double a = rng.uniform(), b = rng.uniform();
        pts.push_back(DDPoint{l == Label::F ? a : 0.8 * a, l == Label::F ? 0.8 * b : b, l});
    }
    return pts;
}

}  // namespace

TEST(Boundary, IdentityIsTheDiagonal)
{
    const auto f = BoundaryFunction::identity(5);
    EXPECT_TRUE(f.is_identity());
    for (double t : {0.0, 0.1234, 0.5, 1.0}) EXPECT_DOUBLE_EQ(f(t), t);
    EXPECT_NEAR(f(1.5), 1.5, 1e-12);
}

TEST(Boundary, StartsAtZeroAndIncreases)
{
    CounterRng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(6);
        for (auto& v : a) v = 6.0 * (rng.uniform() - 0.5);
        const BoundaryFunction f(a);
        EXPECT_EQ(f(0.0), 0.0);
        double prev = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double v = f(i / 1000.0);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(Boundary, ConstantExponentIsLinear)
{
    const BoundaryFunction f({0.7});
    for (double t : {0.0, 0.0031, 0.25, 0.777, 1.0}) EXPECT_NEAR(f(t), std::exp(0.7) * t, 1e-12);
}

TEST(Boundary, LinearExponentMatchesClosedForm)
{
    for (double a1 : {-3.0, 0.5, 4.0}) {
        const BoundaryFunction f({0.0, a1});
        for (int i = 0; i <= 200; ++i) {
            const double t = i / 200.0;
            // the half-cell rule at odd nodes is accurate to step^4 |f'''| / 24
            EXPECT_NEAR(f(t), std::expm1(a1 * t) / a1, 1e-7) << a1 << " " << t;
        }
        for (double t : {0.0013, 0.3333, 0.9871}) EXPECT_NEAR(f(t), std::expm1(a1 * t) / a1, 1e-5 * std::exp(std::fabs(a1)));
    }
}

TEST(Boundary, GradientMatchesFiniteDifferences)
{
    const std::vector<double> a = {0.3, -0.8, 1.1, 0.2};
    const BoundaryFunction f(a);
    std::vector<double> grad(a.size());
    for (double t : {0.1, 0.45, 0.8, 1.0, 0.333, 0.71}) {
        f.value_and_gradient(t, grad);
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto up = a, down = a;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            const double fd = (BoundaryFunction(up)(t) - BoundaryFunction(down)(t)) / 2e-6;
            EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(1.0, std::fabs(fd))) << t << " " << i;
        }
    }
}

TEST(Boundary, RejectsBadCoefficients)
{
    EXPECT_THROW(BoundaryFunction(std::vector<double>{}), ValidationError);
    EXPECT_THROW(BoundaryFunction({0.0, NAN}), ValidationError);
}

TEST(Objective, SmoothedTracksHardError)
{
    const double tau = 100.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = random_points(seed, 200);
        const BoundaryFunction f({0.1 * seed - 1.0, 0.5});
        const double hard = misclassification_rate(pts, f);
        const double soft = smoothed_misclassification(pts, f, tau, {});
        std::size_t near = 0;
        for (const auto& p : pts) near += std::fabs(p.d_g - f(p.d_f)) < 5.0 / tau;
        const double bound = static_cast<double>(near) / pts.size() + sigmoid(-5.0);
        EXPECT_LE(std::fabs(soft - hard), bound);
    }
}

TEST(Objective, SmoothedGradientMatchesFiniteDifferences)
{
    const auto pts = random_points(3, 100);
    const std::vector<double> a = {0.2, -0.4, 0.3};
    std::vector<double> grad(3), dummy;
    smoothed_misclassification(pts, BoundaryFunction(a), 20.0, grad);
    for (std::size_t i = 0; i < 3; ++i) {
        auto up = a, down = a;
        up[i] += 1e-6;
        down[i] -= 1e-6;
        const double fd = (smoothed_misclassification(pts, BoundaryFunction(up), 20.0, dummy) -
                           smoothed_misclassification(pts, BoundaryFunction(down), 20.0, dummy)) /
                          2e-6;
        EXPECT_NEAR(grad[i], fd, 1e-4);
    }
}

TEST(Training, SeparatesCloudsTheDiagonalMisses)
{
    // F sits just above the diagonal, G well above it; f(t) = 1.15 t separates them
    CounterRng rng(4);
    std::vector<DDPoint> pts;
    for (int i = 0; i < 100; ++i) {
        const double x = 0.5 + 0.4 * rng.uniform();
        pts.push_back(DDPoint{x, x + 0.05, Label::F});
        const double y = 0.5 + 0.4 * rng.uniform();
        pts.push_back(DDPoint{y, y + 0.3, Label::G});
    }
    ASSERT_DOUBLE_EQ(misclassification_rate(pts, BoundaryFunction::identity(5)), 0.5);
    const auto trained = train_boundary(pts, {});
    EXPECT_EQ(trained.training_error, 0.0);
    EXPECT_EQ(misclassification_rate(pts, trained.boundary), trained.training_error);
}

TEST(Training, NeverWorseThanTheDiagonalAndDeterministic)
{
    const auto pts = random_points(5, 200);
    OptimizerConfig cfg;
    cfg.max_iterations = 300;
    const auto a = train_boundary(pts, cfg);
    const auto b = train_boundary(pts, cfg);
    EXPECT_LE(a.training_error, misclassification_rate(pts, BoundaryFunction::identity(5)));
    EXPECT_EQ(a.boundary.coefficients(), b.boundary.coefficients());
    cfg.fixed_noise = true;
    EXPECT_LE(train_boundary(pts, cfg).training_error, misclassification_rate(pts, BoundaryFunction::identity(5)));
}

TEST(Training, RejectsBadSettings)
{
    const auto pts = random_points(6, 20);
    OptimizerConfig cfg;
    cfg.anneal = 1.0;
    EXPECT_THROW(train_boundary(pts, cfg), ValidationError);
    cfg = {};
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train_boundary(pts, cfg), ValidationError);
    std::vector<DDPoint> one_group = {DDPoint{0.5, 0.2, Label::F}};
    EXPECT_THROW(train_boundary(one_group, {}), ValidationError);
}

TEST(Classify, IdentityBoundaryIsMaximumDepth)
{
    const auto f = BoundaryFunction::identity(3);
    CounterRng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double a = rng.uniform(), b = i % 10 == 0 ? a : rng.uniform();
        const Label fb = i % 3 ? Label::F : Label::G;
        EXPECT_EQ(classify_dd(a, b, f, fb), classify_md(a, b, fb));
    }
}

TEST(Classify, DecisionIsMonotoneInEachDepth)
{
    const BoundaryFunction f({0.3, -1.0, 0.5});
    for (double df : {0.05, 0.3, 0.9}) {
        bool seen_g = false;
        for (int i = 0; i <= 100; ++i) {
            const Label l = classify_dd(df, i / 100.0, f, Label::F);
            if (seen_g) EXPECT_EQ(l, Label::G);
            seen_g = seen_g || l == Label::G;
        }
    }
}

TEST(Classify, TiesAndZeroDepthsUseTheFallback)
{
    const auto f = BoundaryFunction::identity(2);
    EXPECT_EQ(classify_dd(0.0, 0.0, f, Label::G), Label::G);
    EXPECT_EQ(classify_md(0.0, 0.0, Label::G), Label::G);
    EXPECT_EQ(classify_md(0.4, 0.4, Label::F), Label::F);
    EXPECT_EQ(cardinality_fallback(5, 4.0, 7.0), Label::F);
    EXPECT_EQ(cardinality_fallback(6, 4.0, 7.0), Label::G);
    EXPECT_EQ(cardinality_fallback(5, 4.0, 6.0), Label::F);
}

TEST(DDPlot, IdenticalGroupsLieOnTheDiagonal)
{
    const auto sample = sample_hpp(10.0, kUnit, 100, 8);
    const auto g = fit_group(sample, ModelKind::Kernel);
    const std::vector<Label> labels(sample.size(), Label::F);
    for (const auto& p : dd_points(sample, labels, g, g, {})) EXPECT_EQ(p.d_f, p.d_g);
}

TEST(DDPlot, SeparatesRateGroups)
{
    const auto f = sample_hpp(10.0, kUnit, 100, 9);
    const auto g = sample_hpp(20.0, kUnit, 100, 10);
    const auto pts = dd_plot(f, g, ModelKind::Kernel, ModelKind::Kernel, {});
    ASSERT_EQ(pts.size(), 200u);
    EXPECT_LT(misclassification_rate(pts, BoundaryFunction::identity(5)), 0.1);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].label, i < 100 ? Label::F : Label::G);
}

TEST(Mahalanobis, SquareCorners)
{
    Eigen::MatrixXd rows(4, 2);
    rows << 0, 0, 2, 0, 0, 2, 2, 2;
    const MahalanobisDepth md(rows);
    EXPECT_NEAR(md(Eigen::Vector2d(1, 1)), 1.0, 1e-15);
    // covariance 4/3 I, so squared distance of (2, 1) is 3/4
    EXPECT_NEAR(md(Eigen::Vector2d(2, 1)), 1.0 / 1.75, 1e-12);
    EXPECT_THROW(MahalanobisDepth(Eigen::MatrixXd::Zero(2, 2)), ValidationError);
}

TEST(ErrorRate, CountsDisagreements)
{
    const std::vector<Label> p = {Label::F, Label::G, Label::G, Label::F};
    const std::vector<Label> t = {Label::F, Label::F, Label::G, Label::G};
    EXPECT_DOUBLE_EQ(error_rate(p, t), 0.5);
    EXPECT_THROW(error_rate(p, std::vector<Label>{Label::F}), ValidationError);
}

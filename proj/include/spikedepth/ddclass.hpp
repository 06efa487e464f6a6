#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spikedepth/depth.hpp"
#include "spikedepth/estimation.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

enum class Label : std::uint8_t { F = 0, G = 1 };

struct DDPoint {
    double d_f;
    double d_g;
    Label label;
    // assignment used when the depths cannot decide (tie or both zero)
    Label fallback = Label::F;
};

/// How a group's intensity is estimated from its training trains.
enum class ModelKind { Kernel, Imi };

/// Everything needed to score a train against one training group.
struct GroupModel {
    IntensityModel intensity;
    CardinalityModel cardinality;
    double mean_count;
};

GroupModel fit_group(const TrainSample& sample, ModelKind kind, const ImiOptions& imi = {});

/// Nearest-mean-cardinality rule; F on a tie.
Label cardinality_fallback(std::size_t k, double mean_f, double mean_g);

DDPoint dd_point(const SpikeTrain& train, Label label, const GroupModel& f, const GroupModel& g,
                 const DepthConfig& cfg);

/// One point per train of `trains`; `labels` gives each train's true group.
std::vector<DDPoint> dd_points(const TrainSample& trains, std::span<const Label> labels,
                               const GroupModel& f, const GroupModel& g, const DepthConfig& cfg);

/// Fits both groups on their own trains and returns the DD plot of F u G.
std::vector<DDPoint> dd_plot(const TrainSample& f, const TrainSample& g, ModelKind kind_f,
                             ModelKind kind_g, const DepthConfig& cfg);

/**
 * Strictly increasing boundary f(t) = int_0^t exp(h(x)) dx through the origin,
 * h(x) = sum_i a_i x^i. The integral is tabulated on a uniform grid over
 * [0, 1] with the three-point (Simpson-consistent) rule. Between nodes the
 * cell increment is split in proportion to a partial-cell trapezoid, which
 * keeps f continuous and increasing. Gradient columns use the same scheme.
 */
class BoundaryFunction {
public:
    static constexpr std::size_t kGridPoints = 201;

    explicit BoundaryFunction(std::vector<double> coefficients);
    static BoundaryFunction identity(std::size_t degree);

    const std::vector<double>& coefficients() const { return coef_; }
    std::size_t degree() const { return coef_.size() - 1; }
    bool is_identity() const { return identity_; }

    double operator()(double t) const;
    /// f(t) and df/da_i(t) = int_0^t x^i exp(h(x)) dx.
    double value_and_gradient(double t, std::span<double> grad) const;

private:
    double h(double x) const;

    std::vector<double> coef_;
    bool identity_;
    // cumulative tables: column 0 is f, column i+1 is df/da_i
    std::vector<double> table_;
    std::vector<double> integrand_;
};

struct OptimizerConfig {
    std::size_t degree = 5;
    double learning_rate = 0.05;
    double anneal = 0.95;
    // starting temperature T of the perturbation sqrt(learning_rate * T) Z
    double temperature = 0.1;
    double tolerance = 1e-4;
    double steepness = 100.0;
    std::size_t restarts = 5;
    std::size_t max_iterations = 2000;
    std::uint64_t seed = 7;
    // draw the perturbation once before the loop instead of every iteration
    bool fixed_noise = false;
};

/// Hard error rate; exact ties use each point's fallback label.
double misclassification_rate(std::span<const DDPoint> points, const BoundaryFunction& f);

/// Logistic surrogate of the error rate and its coefficient gradient.
double smoothed_misclassification(std::span<const DDPoint> points, const BoundaryFunction& f,
                                  double steepness, std::span<double> grad);

struct TrainedBoundary {
    BoundaryFunction boundary;
    double training_error;
    std::size_t iterations;
    // false when some restart hit max_iterations before the step fell under tolerance
    bool converged;
};

/// Perturbed, annealed gradient descent on the surrogate, best run by hard error.
TrainedBoundary train_boundary(std::span<const DDPoint> points, const OptimizerConfig& cfg);

/// F iff f(d_F) > d_G; ties and (0, 0) go to `fallback`.
Label classify_dd(double d_f, double d_g, const BoundaryFunction& f, Label fallback);
Label classify_dd(const SpikeTrain& train, const GroupModel& gf, const GroupModel& gg,
                  const BoundaryFunction& f, const DepthConfig& cfg);

/// Larger depth wins; ties go to `fallback`.
Label classify_md(double d_f, double d_g, Label fallback);
Label classify_md(const SpikeTrain& train, const GroupModel& gf, const GroupModel& gg,
                  const DepthConfig& cfg);

/// Fraction of points whose prediction differs from the label.
double error_rate(std::span<const Label> predicted, std::span<const Label> truth);

/// Mahalanobis depth 1 / (1 + (x - m)^T S^{-1} (x - m)) with sample mean/covariance.
class MahalanobisDepth {
public:
    explicit MahalanobisDepth(const Eigen::MatrixXd& rows);
    double operator()(const Eigen::VectorXd& x) const;

private:
    Eigen::VectorXd mean_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
};

}  // namespace spikedepth

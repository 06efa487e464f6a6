#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "spikedepth/intensity.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth {

/// n trains of a homogeneous Poisson process; train i uses substream i of `seed`.
TrainSample sample_hpp(double rate, TimeDomain domain, std::size_t n, std::uint64_t seed);

/// Inhomogeneous Poisson process by thinning against the grid maximum.
TrainSample sample_ipp(const RateCurve& intensity, std::size_t n, std::uint64_t seed);

/// Ogata thinning with the bound refreshed at every candidate.
TrainSample sample_hawkes(const HawkesModel& model, TimeDomain domain, std::size_t n,
                          std::uint64_t seed);

/// Sequential thinning of an IMI model.
TrainSample sample_imi(const ImiGrid& model, std::size_t n, std::uint64_t seed);

/// Intensity shapes used by the simulation studies.
namespace presets {

/// 10 sin(4 pi (t - 1/8)) + 10
double sine_rate(double t);
/// 96 (t - 1/2)^2
double parabola_rate(double t);
/// Two Gaussian bumps (sd 0.05, height 100/sqrt(2 pi)) at 0.25 and 0.75.
double bimodal_rate(double t);
/// Half bumps at 0 and 1 and a full bump at 0.5; same bump shape.
double trimodal_rate(double t);

/// Base intensity of the Hawkes studies, tabulated on [0, 1].
RateCurve bimodal_curve();
/// HawkesModel{ 0.5 * bimodal, alpha = 15, beta = 30 } on [0, 1].
HawkesModel bimodal_hawkes(double alpha = 15.0, double beta = 30.0);

}  // namespace presets

}  // namespace spikedepth

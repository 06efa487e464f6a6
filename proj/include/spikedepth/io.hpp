#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "spikedepth/ddclass.hpp"
#include "spikedepth/depth.hpp"
#include "spikedepth/intensity.hpp"
#include "spikedepth/median.hpp"
#include "spikedepth/outlier.hpp"
#include "spikedepth/spike_train.hpp"

namespace spikedepth::io {

/**
 * Train files: a `#domain <start> <end>` header, then one train per line as
 * ascending times; an empty line is an empty train and a trailing `|<label>`
 * token names the train's group. Exact repeats are pushed 1e-9 past their
 * predecessor and counted in `perturbed`.
 */
struct TrainFile {
    TrainSample sample;
    std::size_t perturbed = 0;
};

TrainFile read_trains(std::istream& in);
TrainFile read_trains(const std::string& path);
void write_trains(std::ostream& out, const TrainSample& sample);
void write_trains(const std::string& path, const TrainSample& sample);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

nlohmann::json model_to_json(const IntensityModel& model);
IntensityModel model_from_json(const nlohmann::json& j);
nlohmann::json cardinality_to_json(const CardinalityModel& cm);
CardinalityModel cardinality_from_json(const nlohmann::json& j);

void write_depth_csv(std::ostream& out, std::span<const DepthScore> scores);
std::vector<DepthScore> read_depth_csv(std::istream& in);

nlohmann::json median_to_json(const MedianResult& m);

void write_outlier_csv(std::ostream& out, const OutlierReport& report);
nlohmann::json outlier_summary_json(const OutlierReport& report);

void write_dd_points_csv(std::ostream& out, std::span<const DDPoint> points);
std::vector<DDPoint> read_dd_points_csv(std::istream& in);
/// f sampled at `samples` evenly spaced points of [0, 1].
void write_boundary_csv(std::ostream& out, const BoundaryFunction& f, std::size_t samples = 1001);
void write_decisions_csv(std::ostream& out, std::span<const Label> predicted, std::span<const Label> truth);

const char* label_name(Label l);
Label parse_label(const std::string& s);

void write_text(const std::string& path, const std::string& contents);

}  // namespace spikedepth::io

#include <gtest/gtest.h>

#include <sstream>

#include "spikedepth/error.hpp"
#include "spikedepth/estimation.hpp"
#include "spikedepth/io.hpp"
#include "spikedepth/simulate.hpp"

using namespace spikedepth;

namespace {

const TimeDomain kUnit(0.0, 1.0);

io::TrainFile parse(const std::string& text)
{
    std::istringstream in(text);
    return io::read_trains(in);
}

io::TrainFile round_trip(const TrainSample& s)
{
    std::ostringstream out;
    io::write_trains(out, s);
    return parse(out.str());
}

void expect_same_cumulative(const IntensityModel& a, const IntensityModel& b, const TrainSample& probes)
{
    for (const auto& tr : probes) {
        const auto ca = cumulative(a, tr), cb = cumulative(b, tr);
        for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) EXPECT_NEAR(ca(t), cb(t), 1e-12 * (1.0 + ca(t)));
    }
}

}  // namespace

TEST(TrainFiles, RoundTripIsExact)
{
    const auto s = TrainSample::concat(sample_hpp(3.0, kUnit, 20, 1), TrainSample({SpikeTrain(kUnit)}));
    const auto back = round_trip(s);
    EXPECT_EQ(back.perturbed, 0u);
    ASSERT_EQ(back.sample.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back.sample[i], s[i]);
    EXPECT_FALSE(back.sample.has_labels());
}

TEST(TrainFiles, EmptyTrainsInTheMiddleSurvive)
{
    const TrainSample s({SpikeTrain(kUnit, {0.5}), SpikeTrain(kUnit), SpikeTrain(kUnit), SpikeTrain(kUnit, {0.1, 0.2})});
    const auto back = round_trip(s);
    ASSERT_EQ(back.sample.size(), 4u);
    EXPECT_TRUE(back.sample[1].empty());
    EXPECT_TRUE(back.sample[2].empty());
    EXPECT_EQ(back.sample[3].size(), 2u);
}

TEST(TrainFiles, LabelsRoundTrip)
{
    const auto a = sample_hpp(3.0, kUnit, 5, 2);
    const TrainSample s(a.trains(), {"F", "G", "F", "F", "G"});
    const auto back = round_trip(s);
    ASSERT_TRUE(back.sample.has_labels());
    EXPECT_EQ(back.sample.labels(), s.labels());
}

TEST(TrainFiles, TiesArePerturbedAndCounted)
{
    const auto f = parse("#domain 0 1\n0.2 0.2 0.2 0.5\n0.1\n");
    EXPECT_EQ(f.perturbed, 2u);
    const auto t = f.sample[0].times();
    EXPECT_LT(t[0], t[1]);
    EXPECT_LT(t[1], t[2]);
    EXPECT_NEAR(t[2], 0.2 + 2e-9, 1e-15);
}

TEST(TrainFiles, MalformedInputIsRejected)
{
    EXPECT_THROW(parse("0.1 0.2\n"), ValidationError);
    EXPECT_THROW(parse("#domain 0 1\n0.3 0.2\n"), ValidationError);
    EXPECT_THROW(parse("#domain 0 1\n0.3 abc\n"), ValidationError);
    EXPECT_THROW(parse("#domain 0 1\n0.3 1.5\n"), ValidationError);
    EXPECT_THROW(parse("#domain 0 1\n0.3 |F\n0.4\n"), ValidationError);
    EXPECT_THROW(io::read_trains(std::string("/nonexistent/trains.txt")), ValidationError);
}

TEST(Models, EveryTypeRoundTrips)
{
    const auto sample = sample_hawkes(presets::bimodal_hawkes(), kUnit, 300, 4);
    ImiOptions imi;
    imi.calibration_trains = 200;
    const std::vector<IntensityModel> models = {
        ConstantRate{7.5},
        presets::bimodal_curve(),
        presets::bimodal_hawkes(),
        HawkesModel{ConstantRate{4.0}, 1.0, 2.0, 5.0},
        estimate_intensity_imi(sample, imi),
    };
    for (const auto& m : models) {
        const auto text = io::model_to_json(m).dump();
        const auto back = io::model_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back.index(), m.index());
        expect_same_cumulative(m, back, TrainSample({sample[0], sample[1], SpikeTrain(kUnit)}));
    }
}

TEST(Models, MalformedJsonIsAValidationError)
{
    EXPECT_THROW(io::model_from_json(nlohmann::json::parse(R"({"type":"nope"})")), ValidationError);
    EXPECT_THROW(io::model_from_json(nlohmann::json::parse(R"({"type":"constant"})")), ValidationError);
    EXPECT_THROW(io::model_from_json(nlohmann::json::parse(R"({"type":"constant","rate":-1})")), ValidationError);
}

TEST(Cardinality, RoundTrips)
{
    const CardinalityModel cm({0.1, 0.0, 0.6, 0.3});
    const auto back = io::cardinality_from_json(io::cardinality_to_json(cm));
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(back.probability(k), cm.probability(k));
}

TEST(DepthCsv, RoundTrips)
{
    const auto sample = sample_hpp(5.0, kUnit, 50, 5);
    const auto scores = depth_all(sample, ConstantRate{5.0}, CardinalityModel::empirical(sample));
    std::stringstream buf;
    io::write_depth_csv(buf, scores);
    const auto back = io::read_depth_csv(buf);
    ASSERT_EQ(back.size(), scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        EXPECT_EQ(back[i].total, scores[i].total);
        EXPECT_EQ(back[i].weight, scores[i].weight);
        EXPECT_EQ(back[i].conditional, scores[i].conditional);
        EXPECT_EQ(back[i].cardinality, scores[i].cardinality);
        EXPECT_EQ(back[i].degenerate, scores[i].degenerate);
    }
}

TEST(DDPointsCsv, RoundTrips)
{
    const std::vector<DDPoint> pts = {{0.1, 0.2, Label::F, Label::G}, {1.0 / 3.0, 0.0, Label::G, Label::F}};
    std::stringstream buf;
    io::write_dd_points_csv(buf, pts);
    const auto back = io::read_dd_points_csv(buf);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].d_f, pts[i].d_f);
        EXPECT_EQ(back[i].d_g, pts[i].d_g);
        EXPECT_EQ(back[i].label, pts[i].label);
        EXPECT_EQ(back[i].fallback, pts[i].fallback);
    }
}

TEST(Labels, ParseAndPrint)
{
    EXPECT_EQ(io::parse_label("F"), Label::F);
    EXPECT_EQ(io::parse_label(io::label_name(Label::G)), Label::G);
    EXPECT_THROW(io::parse_label("H"), ValidationError);
}

TEST(Boundary, CsvHasOneRowPerSample)
{
    std::ostringstream out;
    io::write_boundary_csv(out, BoundaryFunction::identity(2), 11);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 12u);
}

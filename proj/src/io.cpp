#include "spikedepth/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "spikedepth/error.hpp"

namespace spikedepth::io {

using nlohmann::json;

namespace {

constexpr double kTieNudge = 1e-9;

double parse_double(const std::string& tok, const std::string& what)
{
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ValidationError("cannot parse " + what + " '" + tok + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

json base_to_json(const BaseRate& base)
{
    if (const auto* c = std::get_if<ConstantRate>(&base)) return model_to_json(*c);
    return model_to_json(std::get<RateCurve>(base));
}

std::vector<double> doubles(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_array()) throw ValidationError(std::string("model field '") + key + "' is missing");
    return j.at(key).get<std::vector<double>>();
}

TimeDomain domain_from_json(const json& j)
{
    const auto d = doubles(j, "domain");
    require(d.size() == 2, "model domain must have two entries");
    return TimeDomain(d[0], d[1]);
}

}  // namespace

std::string format_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

const char* label_name(Label l) { return l == Label::F ? "F" : "G"; }

Label parse_label(const std::string& s)
{
    if (s == "F" || s == "0") return Label::F;
    if (s == "G" || s == "1") return Label::G;
    throw ValidationError("unknown group label '" + s + "'");
}

// ---------------------------------------------------------------------------
// train files

TrainFile read_trains(std::istream& in)
{
    std::string line;
    std::optional<TimeDomain> domain;
    while (!domain && std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag, a, b;
        ss >> tag >> a >> b;
        if (tag != "#domain" || b.empty()) throw ValidationError("train file must start with '#domain <start> <end>'");
        domain.emplace(parse_double(a, "domain start"), parse_double(b, "domain end"));
    }
    if (!domain) throw ValidationError("train file has no '#domain' header");

    TrainFile file{TrainSample({SpikeTrain(*domain, {})}), 0};
    std::vector<SpikeTrain> trains;
    std::vector<std::string> labels;
    bool any_label = false;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string label;
        if (const auto bar = line.find('|'); bar != std::string::npos) {
            std::istringstream ls(line.substr(bar + 1));
            ls >> label;
            if (label.empty()) throw ValidationError("empty label on line " + std::to_string(lineno));
            any_label = true;
            line.erase(bar);
        }
        std::istringstream ss(line);
        std::vector<double> times;
        std::string tok;
        double raw_prev = 0.0;
        while (ss >> tok) {
            const double raw = parse_double(tok, "event time on line " + std::to_string(lineno));
            if (!times.empty() && raw < raw_prev)
                throw ValidationError("event times must be ascending on line " + std::to_string(lineno));
            double t = raw;
            if (!times.empty() && t <= times.back()) {
                t = times.back() + kTieNudge;
                ++file.perturbed;
            }
            raw_prev = raw;
            times.push_back(t);
        }
        trains.emplace_back(*domain, std::move(times));
        labels.push_back(std::move(label));
    }
    // a final newline does not start another train
    if (trains.empty()) throw ValidationError("train file contains no trains");
    if (any_label) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i].empty()) throw ValidationError("train " + std::to_string(i) + " has no label");
        file.sample = TrainSample(std::move(trains), std::move(labels));
    } else {
        file.sample = TrainSample(std::move(trains));
    }
    return file;
}

TrainFile read_trains(const std::string& path)
{
    auto in = open_in(path);
    return read_trains(in);
}

void write_trains(std::ostream& out, const TrainSample& sample)
{
    out << "#domain " << format_double(sample.domain().start()) << ' ' << format_double(sample.domain().end()) << '\n';
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto times = sample[i].times();
        for (std::size_t j = 0; j < times.size(); ++j) out << (j ? " " : "") << format_double(times[j]);
        if (sample.has_labels()) out << (times.empty() ? "|" : " |") << sample.labels()[i];
        out << '\n';
    }
}

void write_trains(const std::string& path, const TrainSample& sample)
{
    auto out = open_out(path);
    write_trains(out, sample);
}

// ---------------------------------------------------------------------------
// models

json model_to_json(const IntensityModel& model)
{
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantRate>) {
                return {{"type", "constant"}, {"rate", m.rate}};
            } else if constexpr (std::is_same_v<T, RateCurve>) {
                const auto t = m.times();
                const auto r = m.rates();
                return {{"type", "curve"},
                        {"domain", {m.domain().start(), m.domain().end()}},
                        {"times", std::vector<double>(t.begin(), t.end())},
                        {"rates", std::vector<double>(r.begin(), r.end())}};
            } else if constexpr (std::is_same_v<T, HawkesModel>) {
                return {{"type", "hawkes"},
                        {"base", base_to_json(m.base)},
                        {"base_scale", m.base_scale},
                        {"alpha", m.alpha},
                        {"beta", m.beta}};
            } else {
                const auto tg = m.time_grid();
                const auto lg = m.lag_grid();
                const auto lf = m.lag_factor();
                return {{"type", "imi"},
                        {"marginal", model_to_json(m.marginal())},
                        {"time_grid", std::vector<double>(tg.begin(), tg.end())},
                        {"lag_grid", std::vector<double>(lg.begin(), lg.end())},
                        {"lag_factor", std::vector<double>(lf.begin(), lf.end())},
                        {"scale", m.scale()}};
            }
        },
        model);
}

IntensityModel model_from_json(const json& j)
{
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "constant") {
            const double rate = j.at("rate").get<double>();
            require(rate > 0.0, "constant rate must be positive");
            return ConstantRate{rate};
        }
        if (type == "curve") return RateCurve(domain_from_json(j), doubles(j, "times"), doubles(j, "rates"));
        if (type == "hawkes") {
            const IntensityModel base = model_from_json(j.at("base"));
            HawkesModel h;
            if (const auto* c = std::get_if<ConstantRate>(&base))
                h.base = *c;
            else if (const auto* r = std::get_if<RateCurve>(&base))
                h.base = *r;
            else
                throw ValidationError("Hawkes base must be a constant or a curve");
            h.base_scale = j.value("base_scale", 0.5);
            h.alpha = j.at("alpha").get<double>();
            h.beta = j.at("beta").get<double>();
            require(h.base_scale > 0.0 && h.alpha >= 0.0 && h.beta > h.alpha, "Hawkes parameters need 0 <= alpha < beta");
            return h;
        }
        if (type == "imi") {
            const IntensityModel marginal = model_from_json(j.at("marginal"));
            const auto* curve = std::get_if<RateCurve>(&marginal);
            if (!curve) throw ValidationError("IMI marginal must be a curve");
            return ImiGrid(*curve, doubles(j, "time_grid"), doubles(j, "lag_grid"), doubles(j, "lag_factor"),
                           j.at("scale").get<double>());
        }
        throw ValidationError("unknown model type '" + type + "'");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
}

json cardinality_to_json(const CardinalityModel& cm)
{
    std::vector<double> pmf(cm.max_count() + 1);
    for (std::size_t k = 0; k < pmf.size(); ++k) pmf[k] = cm.probability(k);
    return {{"pmf", pmf}};
}

CardinalityModel cardinality_from_json(const json& j) { return CardinalityModel(doubles(j, "pmf")); }

// ---------------------------------------------------------------------------
// result tables

void write_depth_csv(std::ostream& out, std::span<const DepthScore> scores)
{
    out << "index,cardinality,weight,conditional,depth,degenerate\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        out << i << ',' << s.cardinality << ',' << format_double(s.weight) << ',' << format_double(s.conditional)
            << ',' << format_double(s.total) << ',' << (s.degenerate ? 1 : 0) << '\n';
    }
}

std::vector<DepthScore> read_depth_csv(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    std::vector<DepthScore> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        require(c.size() == 6, "depth CSV rows have six columns");
        DepthScore s;
        s.cardinality = static_cast<std::size_t>(parse_double(c[1], "cardinality"));
        s.weight = parse_double(c[2], "weight");
        s.conditional = parse_double(c[3], "conditional depth");
        s.total = parse_double(c[4], "depth");
        s.degenerate = c[5] == "1";
        out.push_back(s);
    }
    return out;
}

json median_to_json(const MedianResult& m)
{
    const auto t = m.median.times();
    return {{"cardinality", m.cardinality},
            {"times", std::vector<double>(t.begin(), t.end())},
            {"domain", {m.median.domain().start(), m.median.domain().end()}},
            {"depth", m.depth.total},
            {"weight", m.depth.weight},
            {"conditional", m.depth.conditional}};
}

void write_outlier_csv(std::ostream& out, const OutlierReport& report)
{
    out << "index,cardinality,depth,threshold,total_intensity,flagged\n";
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
        const auto& v = report.verdicts[i];
        out << i << ',' << v.cardinality << ',' << format_double(v.depth.total) << ',' << format_double(v.threshold)
            << ',' << format_double(v.total_intensity) << ',' << (v.flagged ? 1 : 0) << '\n';
    }
}

json outlier_summary_json(const OutlierReport& report)
{
    json j = {{"trains", report.verdicts.size()},
              {"flagged_count", report.flagged_count},
              {"flagged", report.flagged_indices()},
              {"delta", report.delta},
              {"n_mc", report.n_mc},
              {"seed", report.seed}};
    if (report.metrics) {
        const auto& m = *report.metrics;
        j["metrics"] = {{"true_positives", m.true_positives},
                        {"false_positives", m.false_positives},
                        {"false_negatives", m.false_negatives},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1}};
    }
    return j;
}

void write_dd_points_csv(std::ostream& out, std::span<const DDPoint> points)
{
    out << "index,d_f,d_g,label,fallback\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        out << i << ',' << format_double(p.d_f) << ',' << format_double(p.d_g) << ',' << label_name(p.label) << ','
            << label_name(p.fallback) << '\n';
    }
}

std::vector<DDPoint> read_dd_points_csv(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    std::vector<DDPoint> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        require(c.size() == 5, "DD point rows have five columns");
        out.push_back(DDPoint{parse_double(c[1], "d_f"), parse_double(c[2], "d_g"), parse_label(c[3]), parse_label(c[4])});
    }
    return out;
}

void write_boundary_csv(std::ostream& out, const BoundaryFunction& f, std::size_t samples)
{
    require(samples >= 2, "boundary needs at least two samples");
    out << "d_f,boundary\n";
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        out << format_double(t) << ',' << format_double(f(t)) << '\n';
    }
}

void write_decisions_csv(std::ostream& out, std::span<const Label> predicted, std::span<const Label> truth)
{
    require(truth.empty() || truth.size() == predicted.size(), "prediction and truth differ in length");
    out << (truth.empty() ? "index,predicted\n" : "index,predicted,truth\n");
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        out << i << ',' << label_name(predicted[i]);
        if (!truth.empty()) out << ',' << label_name(truth[i]);
        out << '\n';
    }
}

void write_text(const std::string& path, const std::string& contents)
{
    auto out = open_out(path);
    out << contents;
}

}  // namespace spikedepth::io

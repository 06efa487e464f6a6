#include "spikedepth/spike_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikedepth/error.hpp"

namespace spikedepth {

namespace {

// (sqrt(dt) - sqrt(ds))^2: exact warping penalty of one linear piece.
double segment_penalty(double ds, double dt)
{
    const double d = std::sqrt(dt) - std::sqrt(ds);
    return d * d;
}

}  // namespace

double matching_cost(const SpikeTrain& f, const SpikeTrain& g, const Alignment& alignment, double mu)
{
    require(f.domain() == g.domain(), "trains live on different domains");
    const auto& dom = f.domain();
    double pen = 0.0;
    double prev_t = dom.start(), prev_s = dom.start();
    std::size_t last_i = 0, last_j = 0;
    bool first = true;
    for (auto [i, j] : alignment.pairs) {
        require(i < f.size() && j < g.size(), "alignment index out of range");
        require(first || (i > last_i && j > last_j), "alignment must increase in both trains");
        pen += segment_penalty(g[j] - prev_s, f[i] - prev_t);
        prev_t = f[i];
        prev_s = g[j];
        last_i = i;
        last_j = j;
        first = false;
    }
    pen += segment_penalty(dom.end() - prev_s, dom.end() - prev_t);
    return static_cast<double>(f.size() + g.size()) - 2.0 * static_cast<double>(alignment.pairs.size()) +
           mu * pen;
}

MetricResult d_mu_aligned(const SpikeTrain& f, const SpikeTrain& g, double mu)
{
    require(f.domain() == g.domain(), "trains live on different domains");
    require(std::isfinite(mu) && mu >= 0.0, "penalty mu must be non-negative");
    const auto& dom = f.domain();
    const std::size_t m = f.size(), n = g.size();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    // best[i*n + j]: cheapest cost of a chain of matches ending at (i, j),
    // excluding the constant M + N and the closing segment
    std::vector<double> best(m * n);
    std::vector<std::size_t> from(m * n, none);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double c = mu * segment_penalty(g[j] - dom.start(), f[i] - dom.start());
            std::size_t arg = none;
            for (std::size_t pi = 0; pi < i; ++pi) {
                for (std::size_t pj = 0; pj < j; ++pj) {
                    const double v = best[pi * n + pj] + mu * segment_penalty(g[j] - g[pj], f[i] - f[pi]);
                    if (v < c) {
                        c = v;
                        arg = pi * n + pj;
                    }
                }
            }
            best[i * n + j] = c - 2.0;
            from[i * n + j] = arg;
        }
    }

    double cost = mu * segment_penalty(dom.length(), dom.length());
    std::size_t end = none;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = best[i * n + j] + mu * segment_penalty(dom.end() - g[j], dom.end() - f[i]);
            if (v < cost) {
                cost = v;
                end = i * n + j;
            }
        }
    }

    MetricResult out{0.0, {}};
    for (std::size_t cur = end; cur != none; cur = from[cur]) out.alignment.pairs.emplace_back(cur / n, cur % n);
    std::reverse(out.alignment.pairs.begin(), out.alignment.pairs.end());
    const double sq = static_cast<double>(m + n) + cost;
    out.distance = std::sqrt(std::max(sq, 0.0));
    return out;
}

double d_mu(const SpikeTrain& f, const SpikeTrain& g, double mu) { return d_mu_aligned(f, g, mu).distance; }

}  // namespace spikedepth

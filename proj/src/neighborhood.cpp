#include "texdr/neighborhood.hpp"

#include <cmath>

#include "texdr/errors.hpp"

namespace texdr {

namespace {

int resolve(int v, int lo, int hi, BorderPolicy border) {
    if (v >= lo && v <= hi) return v;
    if (border == BorderPolicy::Clamp) return v < lo ? lo : hi;
    // Mirror without edge repetition: ...2,1,0 | 0,1,2... reflects as 1,2 past 0.
    const int n = hi - lo + 1;
    int t = v - lo;
    const int period = 2 * n - 2;
    if (period == 0) return lo;
    t = ((t % period) + period) % period;
    if (t >= n) t = period - t;
    return lo + t;
}

} // namespace

std::vector<double> neighborhood_weights(const NeighborhoodSpec& spec) {
    if (spec.radius < 0) throw ConfigError("neighborhood radius must be non-negative");
    const int r = spec.radius;
    const std::size_t m = spec.pixel_count();
    std::vector<double> w(m);
    if (spec.weighting == WeightingScheme::Uniform || r == 0) {
        const double u = 1.0 / static_cast<double>(m);
        for (auto& v : w) v = u;
        return w;
    }
    double sigma = spec.sigma;
    if (sigma <= 0.0) sigma = std::max(0.5, static_cast<double>(r) / 2.0);
    double sum = 0.0;
    std::size_t idx = 0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx, ++idx) {
            const double v = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
            w[idx] = v;
            sum += v;
        }
    }
    for (auto& v : w) v /= sum;
    return w;
}

std::vector<std::pair<PixelIndex, double>>
neighborhood_members(const HighDimImage& image, PixelIndex center,
                     const NeighborhoodSpec& spec) {
    if (!image.contains(center)) throw DataError("neighborhood center outside image");
    const auto weights = neighborhood_weights(spec);
    const int r = spec.radius;
    const int w = static_cast<int>(image.width());
    const int h = static_cast<int>(image.height());
    std::vector<std::pair<PixelIndex, double>> members;
    members.reserve(spec.pixel_count());
    std::size_t idx = 0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx, ++idx) {
            const PixelIndex p{resolve(center.x + dx, 0, w - 1, spec.border),
                               resolve(center.y + dy, 0, h - 1, spec.border)};
            members.emplace_back(p, weights[idx]);
        }
    }
    return members;
}

PointCloud extract_patch(const HighDimImage& image, PixelIndex center,
                         const NeighborhoodSpec& spec) {
    const auto members = neighborhood_members(image, center, spec);
    PointCloud cloud;
    cloud.points = members.size();
    cloud.channels = image.channels();
    cloud.data.reserve(cloud.points * cloud.channels);
    for (const auto& [p, weight] : members) {
        const auto px = image.pixel(p);
        cloud.data.insert(cloud.data.end(), px.begin(), px.end());
    }
    return cloud;
}

} // namespace texdr

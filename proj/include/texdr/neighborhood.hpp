#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "texdr/image.hpp"

namespace texdr {

enum class WeightingScheme { Uniform, Gaussian };
enum class BorderPolicy { Clamp, Mirror };

/// Square spatial neighborhood of M = (2*radius+1)^2 pixels with a
/// per-offset weight vector that sums to 1.
struct NeighborhoodSpec {
    int radius = 1;
    WeightingScheme weighting = WeightingScheme::Uniform;
    double sigma = 0.0; // gaussian only; <= 0 means radius/2 (min 0.5)
    BorderPolicy border = BorderPolicy::Clamp;

    std::size_t pixel_count() const {
        const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
        return side * side;
    }
};

/// Weight per neighborhood offset in row-major offset order
/// (dy = -radius..radius outer, dx inner). Entries sum to 1.
std::vector<double> neighborhood_weights(const NeighborhoodSpec& spec);

/// All M neighborhood members of `center` with their weights. Out-of-image
/// offsets are resolved by the border policy, so the count is always M.
std::vector<std::pair<PixelIndex, double>>
neighborhood_members(const HighDimImage& image, PixelIndex center,
                     const NeighborhoodSpec& spec);

/// The attribute vectors of a spatial neighborhood, one row per member
/// pixel, in the same deterministic row-major offset order as
/// neighborhood_members.
struct PointCloud {
    std::size_t points = 0;
    std::size_t channels = 0;
    std::vector<double> data; // points x channels, row-major

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * channels, channels};
    }
};

PointCloud extract_patch(const HighDimImage& image, PixelIndex center,
                         const NeighborhoodSpec& spec);

} // namespace texdr

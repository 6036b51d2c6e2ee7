#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "texdr/image.hpp"
#include "texdr/tsne.hpp"

namespace texdr {

/// Synthetic benchmark: four attribute classes arranged as four homogeneous
/// central squares surrounded by four quadrant checkerboards of 2x2 blocks.
/// Labels distinguish 8 regions (4 homogeneous + 4 checkered).
struct SyntheticSpec {
    std::size_t side = 32;
    std::size_t channels = 2;
    std::array<std::array<double, 2>, 4> class_means = {{
        {0.2, 0.2}, {0.8, 0.2}, {0.2, 0.8}, {0.8, 0.8},
    }};
    // Class pair per quadrant checkerboard (TL, TR, BL, BR); defaults pair
    // each quadrant's central class with an adjacent one so every attribute
    // class appears in two different checkerboards.
    std::array<std::array<int, 2>, 4> checker_pairs = {{
        {0, 1}, {1, 3}, {0, 2}, {2, 3},
    }};
    double noise_sd = 0.05;
    std::size_t block = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    HighDimImage image;
    LabelRaster labels;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// hits[k-1] = average over labeled probes of the fraction of the k nearest
/// embedding-space neighbors sharing the probe's label. The probe itself is
/// excluded; unlabeled points are never probes but stay candidate neighbors
/// and count as misses.
struct NeighborHitCurve {
    std::size_t k_max = 0;
    std::vector<double> hits;

    double mean() const;
};

NeighborHitCurve neighbor_hit(const Embedding& embedding, const LabelRaster& labels,
                              std::size_t k_max);

void save_neighbor_hit(const NeighborHitCurve& curve, const std::string& path);

using Rgb = std::array<std::uint8_t, 3>;

struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; // width x height x 3
};

/// Map each embedding point through a bilinear 2D colormap: axes are
/// min-max normalized, corners are (x0y0, x1y0, x0y1, x1y1). A degenerate
/// axis maps to 0.5.
RgbImage recolor(const Embedding& embedding, std::size_t width, std::size_t height,
                 const std::array<Rgb, 4>& corners);

/// Default corner colors for the 2D colormap.
constexpr std::array<Rgb, 4> kDefaultColormap = {{
    {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
}};

void save_ppm(const RgbImage& image, const std::string& path); // P6, bit-exact reference
void save_png(const RgbImage& image, const std::string& path);

} // namespace texdr

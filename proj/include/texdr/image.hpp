#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace texdr {

struct PixelIndex {
    int x = 0; // column
    int y = 0; // row
};

/// A high-dimensional raster image: every pixel carries a C-dimensional
/// attribute vector. Storage is row-major by pixel, channel-contiguous.
class HighDimImage {
public:
    HighDimImage() = default;
    HighDimImage(std::size_t width, std::size_t height, std::size_t channels);
    HighDimImage(std::size_t width, std::size_t height, std::size_t channels,
                 std::vector<double> data);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t channels() const { return channels_; }
    std::size_t pixel_count() const { return width_ * height_; }

    std::size_t pixel_id(PixelIndex p) const {
        return static_cast<std::size_t>(p.y) * width_ + static_cast<std::size_t>(p.x);
    }
    PixelIndex pixel_at(std::size_t id) const {
        return {static_cast<int>(id % width_), static_cast<int>(id / width_)};
    }
    bool contains(PixelIndex p) const {
        return p.x >= 0 && p.y >= 0 &&
               static_cast<std::size_t>(p.x) < width_ &&
               static_cast<std::size_t>(p.y) < height_;
    }

    /// Attribute vector of one pixel.
    std::span<const double> pixel(std::size_t id) const {
        return {data_.data() + id * channels_, channels_};
    }
    std::span<const double> pixel(PixelIndex p) const { return pixel(pixel_id(p)); }

    double at(std::size_t x, std::size_t y, std::size_t c) const {
        return data_[(y * width_ + x) * channels_ + c];
    }
    double& at(std::size_t x, std::size_t y, std::size_t c) {
        return data_[(y * width_ + x) * channels_ + c];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const HighDimImage&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

/// Integer class id per pixel; 0 is reserved for "unlabeled".
struct LabelRaster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<int> labels;

    static constexpr int kUnlabeled = 0;

    int at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
};

enum class ImageFormat { FlatBinary, Csv };

/// Flat-binary: raw f64le payload plus a JSON sidecar header at path + ".json".
/// CSV: one row per pixel with a "# width,height,channels" comment line.
HighDimImage load_image(const std::string& path, ImageFormat format);
void save_image(const HighDimImage& image, const std::string& path, ImageFormat format);

LabelRaster load_labels(const std::string& path);
void save_labels(const LabelRaster& labels, const std::string& path);

/// Per-channel 2D Gaussian convolution with clamp border handling.
HighDimImage gaussian_filter(const HighDimImage& image, double sigma, int ksize);

enum class NormalizeMode { None, MinMax, ZScore };

/// Per-channel normalization; constant channels map to 0 for both modes.
HighDimImage normalize_channels(const HighDimImage& image, NormalizeMode mode);

} // namespace texdr

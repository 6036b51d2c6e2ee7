#include "texdr/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "texdr/errors.hpp"

namespace texdr {

namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t channels) {
    if (width < 1 || height < 1 || channels < 1) {
        throw DataError("image dimensions must be at least 1x1x1, got " +
                        std::to_string(width) + "x" + std::to_string(height) + "x" +
                        std::to_string(channels));
    }
}

void check_finite(const std::vector<double>& data) {
    for (double v : data) {
        if (!std::isfinite(v)) throw DataError("image contains non-finite attribute values");
    }
}

} // namespace

HighDimImage::HighDimImage(std::size_t width, std::size_t height, std::size_t channels)
    : width_(width), height_(height), channels_(channels),
      data_(width * height * channels, 0.0) {
    check_dims(width, height, channels);
}

HighDimImage::HighDimImage(std::size_t width, std::size_t height, std::size_t channels,
                           std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != width_ * height_ * channels_) {
        throw DataError("image payload has " + std::to_string(data_.size()) +
                        " values, expected " + std::to_string(width_ * height_ * channels_));
    }
    check_finite(data_);
}

namespace {

HighDimImage load_flat_binary(const std::string& path) {
    const std::string header_path = path + ".json";
    std::ifstream header_in(header_path);
    if (!header_in) throw DataError("cannot open header " + header_path);
    nlohmann::json header;
    try {
        header_in >> header;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed header " + header_path + ": " + e.what());
    }
    if (header.value("dtype", "") != "f64le") {
        throw DataError(header_path + ": unsupported dtype, expected f64le");
    }
    const auto width = header.at("width").get<std::size_t>();
    const auto height = header.at("height").get<std::size_t>();
    const auto channels = header.at("channels").get<std::size_t>();
    check_dims(width, height, channels);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    const std::size_t expected = width * height * channels;
    std::vector<double> data(expected);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(double)) {
        throw DataError(path + ": payload shorter than header dimensions declare");
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw DataError(path + ": payload longer than header dimensions declare");
    }
    return HighDimImage(width, height, channels, std::move(data));
}

HighDimImage load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::size_t width = 0, height = 0, channels = 0;
    std::vector<double> data;
    std::string line;
    bool have_dims = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string dims = line.substr(1);
            std::replace(dims.begin(), dims.end(), ',', ' ');
            std::istringstream ds(dims);
            if (ds >> width >> height >> channels) have_dims = true;
            continue;
        }
        std::string row = line;
        std::replace(row.begin(), row.end(), ',', ' ');
        std::istringstream rs(row);
        double v;
        while (rs >> v) data.push_back(v);
    }
    if (!have_dims) throw DataError(path + ": missing '# width,height,channels' line");
    check_dims(width, height, channels);
    if (data.size() != width * height * channels) {
        throw DataError(path + ": expected " + std::to_string(width * height * channels) +
                        " values, found " + std::to_string(data.size()));
    }
    return HighDimImage(width, height, channels, std::move(data));
}

} // namespace

HighDimImage load_image(const std::string& path, ImageFormat format) {
    if (!std::filesystem::exists(path)) throw DataError("no such file: " + path);
    switch (format) {
        case ImageFormat::FlatBinary: return load_flat_binary(path);
        case ImageFormat::Csv: return load_csv(path);
    }
    throw DataError("unknown image format");
}

void save_image(const HighDimImage& image, const std::string& path, ImageFormat format) {
    if (format == ImageFormat::FlatBinary) {
        nlohmann::json header = {{"width", image.width()},
                                 {"height", image.height()},
                                 {"channels", image.channels()},
                                 {"dtype", "f64le"}};
        std::ofstream header_out(path + ".json");
        if (!header_out) throw DataError("cannot write " + path + ".json");
        header_out << header.dump() << "\n";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        out.write(reinterpret_cast<const char*>(image.data().data()),
                  static_cast<std::streamsize>(image.data().size() * sizeof(double)));
        if (!out) throw DataError("write failed: " + path);
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "# " << image.width() << "," << image.height() << "," << image.channels() << "\n";
    out.precision(17);
    for (std::size_t id = 0; id < image.pixel_count(); ++id) {
        const auto px = image.pixel(id);
        for (std::size_t c = 0; c < px.size(); ++c) {
            if (c) out << ",";
            out << px[c];
        }
        out << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

LabelRaster load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    LabelRaster raster;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream rs(line);
        std::size_t row_len = 0;
        int v;
        while (rs >> v) {
            if (v < 0) throw DataError(path + ": negative class id");
            raster.labels.push_back(v);
            ++row_len;
        }
        if (row_len == 0) continue;
        if (raster.width == 0) raster.width = row_len;
        else if (row_len != raster.width) throw DataError(path + ": ragged label rows");
        ++raster.height;
    }
    if (raster.labels.empty()) throw DataError(path + ": no labels");
    return raster;
}

void save_labels(const LabelRaster& raster, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (std::size_t y = 0; y < raster.height; ++y) {
        for (std::size_t x = 0; x < raster.width; ++x) {
            if (x) out << ",";
            out << raster.at(x, y);
        }
        out << "\n";
    }
}

HighDimImage gaussian_filter(const HighDimImage& image, double sigma, int ksize) {
    if (sigma <= 0.0) throw ConfigError("gaussian_filter: sigma must be positive");
    if (ksize < 1 || ksize % 2 == 0) throw ConfigError("gaussian_filter: ksize must be odd");

    const int r = ksize / 2;
    std::vector<double> kernel(static_cast<std::size_t>(ksize));
    double sum = 0.0;
    for (int t = -r; t <= r; ++t) {
        const double v = std::exp(-0.5 * t * t / (sigma * sigma));
        kernel[static_cast<std::size_t>(t + r)] = v;
        sum += v;
    }
    for (auto& v : kernel) v /= sum;

    const int w = static_cast<int>(image.width());
    const int h = static_cast<int>(image.height());
    const std::size_t ch = image.channels();

    // Separable: horizontal then vertical pass, clamp at borders.
    HighDimImage tmp(image.width(), image.height(), ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    const int xs = std::clamp(x + t, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(t + r)] *
                           image.at(static_cast<std::size_t>(xs), static_cast<std::size_t>(y), c);
                }
                tmp.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) = acc;
            }
        }
    }
    HighDimImage out(image.width(), image.height(), ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    const int ys = std::clamp(y + t, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(t + r)] *
                           tmp.at(static_cast<std::size_t>(x), static_cast<std::size_t>(ys), c);
                }
                out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) = acc;
            }
        }
    }
    return out;
}

HighDimImage normalize_channels(const HighDimImage& image, NormalizeMode mode) {
    if (mode == NormalizeMode::None) return image;
    HighDimImage out = image;
    const std::size_t n = image.pixel_count();
    const std::size_t ch = image.channels();
    for (std::size_t c = 0; c < ch; ++c) {
        if (mode == NormalizeMode::MinMax) {
            double lo = image.data()[c], hi = image.data()[c];
            for (std::size_t i = 0; i < n; ++i) {
                const double v = image.data()[i * ch + c];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < n; ++i) {
                out.data()[i * ch + c] =
                    range > 0.0 ? (image.data()[i * ch + c] - lo) / range : 0.0;
            }
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += image.data()[i * ch + c];
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = image.data()[i * ch + c] - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            const double sd = std::sqrt(var);
            for (std::size_t i = 0; i < n; ++i) {
                out.data()[i * ch + c] =
                    sd > 0.0 ? (image.data()[i * ch + c] - mean) / sd : 0.0;
            }
        }
    }
    return out;
}

} // namespace texdr

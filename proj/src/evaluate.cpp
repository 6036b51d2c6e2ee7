#include "texdr/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <zlib.h>

#include "texdr/errors.hpp"

namespace texdr {

void SyntheticSpec::validate() const {
    if (channels != 2) throw ConfigError("synthetic: exactly 2 channels supported");
    if (block < 1) throw ConfigError("synthetic: block size must be positive");
    if (side == 0 || side % (4 * block) != 0) {
        throw ConfigError("synthetic: side must be divisible by 4*block");
    }
    if (noise_sd < 0.0) throw ConfigError("synthetic: noise sd must be non-negative");
    for (const auto& pair : checker_pairs) {
        for (int c : pair) {
            if (c < 0 || c > 3) throw ConfigError("synthetic: checker class out of range");
        }
    }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t side = spec.side;
    const std::size_t quarter = side / 4;

    SyntheticData out{HighDimImage(side, side, spec.channels), {side, side, {}}};
    out.labels.labels.assign(side * side, 0);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);

    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const bool central_x = x >= quarter && x < 3 * quarter;
            const bool central_y = y >= quarter && y < 3 * quarter;
            const std::size_t qx = x < side / 2 ? 0 : 1;
            const std::size_t qy = y < side / 2 ? 0 : 1;
            const std::size_t quadrant = qy * 2 + qx;

            int cls;
            int label;
            if (central_x && central_y) {
                cls = static_cast<int>(quadrant);
                label = 1 + cls;
            } else {
                const auto& pair = spec.checker_pairs[quadrant];
                const std::size_t parity = (x / spec.block + y / spec.block) % 2;
                cls = pair[parity];
                label = 5 + static_cast<int>(quadrant);
            }
            out.labels.labels[y * side + x] = label;
            for (std::size_t c = 0; c < spec.channels; ++c) {
                const double v =
                    spec.class_means[static_cast<std::size_t>(cls)][c] +
                    (spec.noise_sd > 0.0 ? noise(rng) : 0.0);
                out.image.at(x, y, c) = v;
            }
        }
    }
    return out;
}

double NeighborHitCurve::mean() const {
    if (hits.empty()) return 0.0;
    return std::accumulate(hits.begin(), hits.end(), 0.0) / static_cast<double>(hits.size());
}

NeighborHitCurve neighbor_hit(const Embedding& embedding, const LabelRaster& labels,
                              std::size_t k_max) {
    const std::size_t n = embedding.n;
    if (labels.labels.size() != n) throw DataError("neighbor_hit: label/embedding size mismatch");
    if (k_max < 1 || k_max >= n) throw ConfigError("neighbor_hit: k_max must satisfy 1 <= k < n");

    NeighborHitCurve curve;
    curve.k_max = k_max;
    curve.hits.assign(k_max, 0.0);

    std::size_t probes = 0;
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = labels.labels[i];
        if (label == LabelRaster::kUnlabeled) continue;
        ++probes;
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = embedding.x(i) - embedding.x(j);
            const double dy = embedding.y(i) - embedding.y(j);
            order.emplace_back(dx * dx + dy * dy, j);
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_max),
                          order.end());
        std::size_t same = 0;
        for (std::size_t k = 0; k < k_max; ++k) {
            if (labels.labels[order[k].second] == label) ++same;
            curve.hits[k] += static_cast<double>(same) / static_cast<double>(k + 1);
        }
    }
    if (probes == 0) throw DataError("neighbor_hit: no labeled probe points");
    for (auto& h : curve.hits) h /= static_cast<double>(probes);
    return curve;
}

void save_neighbor_hit(const NeighborHitCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "k,hit\n";
    for (std::size_t k = 0; k < curve.k_max; ++k) out << k + 1 << "," << curve.hits[k] << "\n";
}

RgbImage recolor(const Embedding& embedding, std::size_t width, std::size_t height,
                 const std::array<Rgb, 4>& corners) {
    const std::size_t n = embedding.n;
    if (n != width * height) throw DataError("recolor: embedding size != width*height");

    double min_x = embedding.x(0), max_x = min_x;
    double min_y = embedding.y(0), max_y = min_y;
    for (std::size_t i = 1; i < n; ++i) {
        min_x = std::min(min_x, embedding.x(i));
        max_x = std::max(max_x, embedding.x(i));
        min_y = std::min(min_y, embedding.y(i));
        max_y = std::max(max_y, embedding.y(i));
    }
    const double span_x = max_x - min_x;
    const double span_y = max_y - min_y;

    RgbImage out;
    out.width = width;
    out.height = height;
    out.pixels.resize(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = span_x > 0.0 ? (embedding.x(i) - min_x) / span_x : 0.5;
        const double v = span_y > 0.0 ? (embedding.y(i) - min_y) / span_y : 0.5;
        for (std::size_t c = 0; c < 3; ++c) {
            const double blend = (1.0 - u) * (1.0 - v) * corners[0][c] +
                                 u * (1.0 - v) * corners[1][c] +
                                 (1.0 - u) * v * corners[2][c] + u * v * corners[3][c];
            out.pixels[i * 3 + c] = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(blend), 0, 255));
        }
    }
    return out;
}

void save_ppm(const RgbImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw DataError("write failed: " + path);
}

namespace {

void write_png_chunk(std::ofstream& out, const char type[4],
                     const std::vector<std::uint8_t>& payload) {
    auto write_u32 = [&out](std::uint32_t v) {
        const std::uint8_t be[4] = {static_cast<std::uint8_t>(v >> 24),
                                    static_cast<std::uint8_t>(v >> 16),
                                    static_cast<std::uint8_t>(v >> 8),
                                    static_cast<std::uint8_t>(v)};
        out.write(reinterpret_cast<const char*>(be), 4);
    };
    write_u32(static_cast<std::uint32_t>(payload.size()));
    out.write(type, 4);
    if (!payload.empty()) {
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
    }
    uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(type), 4);
    if (!payload.empty()) {
        crc = crc32(crc, payload.data(), static_cast<uInt>(payload.size()));
    }
    write_u32(static_cast<std::uint32_t>(crc));
}

} // namespace

void save_png(const RgbImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    static const std::uint8_t magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(magic), 8);

    std::vector<std::uint8_t> ihdr(13);
    auto put_u32 = [](std::uint8_t* p, std::uint32_t v) {
        p[0] = static_cast<std::uint8_t>(v >> 24);
        p[1] = static_cast<std::uint8_t>(v >> 16);
        p[2] = static_cast<std::uint8_t>(v >> 8);
        p[3] = static_cast<std::uint8_t>(v);
    };
    put_u32(ihdr.data(), static_cast<std::uint32_t>(image.width));
    put_u32(ihdr.data() + 4, static_cast<std::uint32_t>(image.height));
    ihdr[8] = 8;  // bit depth
    ihdr[9] = 2;  // RGB
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    write_png_chunk(out, "IHDR", ihdr);

    // Filter byte 0 before each scanline, then one zlib stream.
    std::vector<std::uint8_t> raw;
    raw.reserve(image.height * (1 + image.width * 3));
    for (std::size_t y = 0; y < image.height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = image.pixels.data() + y * image.width * 3;
        raw.insert(raw.end(), row, row + image.width * 3);
    }
    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK) {
        throw NumericalError("png: zlib compression failed");
    }
    compressed.resize(compressed_size);
    write_png_chunk(out, "IDAT", compressed);
    write_png_chunk(out, "IEND", {});
    if (!out) throw DataError("write failed: " + path);
}

} // namespace texdr

#include "texdr/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "texdr/errors.hpp"

namespace texdr {

std::size_t rice_bins(std::size_t neighborhood_pixels) {
    if (neighborhood_pixels < 1) throw ConfigError("rice_bins: M must be at least 1");
    const double b = 2.0 * std::cbrt(static_cast<double>(neighborhood_pixels));
    return static_cast<std::size_t>(std::ceil(b - 1e-12));
}

std::vector<double> global_bin_edges(const HighDimImage& image, std::size_t bins) {
    if (bins < 1) throw ConfigError("bin count must be at least 1");
    const std::size_t ch = image.channels();
    const std::size_t n = image.pixel_count();
    std::vector<double> edges(ch * (bins + 1));
    for (std::size_t c = 0; c < ch; ++c) {
        double lo = image.data()[c], hi = image.data()[c];
        for (std::size_t i = 0; i < n; ++i) {
            const double v = image.data()[i * ch + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi <= lo) hi = lo + 1.0; // constant channel: arbitrary unit-width grid
        for (std::size_t b = 0; b <= bins; ++b) {
            edges[c * (bins + 1) + b] =
                lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
        }
    }
    return edges;
}

HistogramStack histogram_feature(const PointCloud& patch, std::span<const double> weights,
                                 std::span<const double> bin_edges, std::size_t bins) {
    const std::size_t ch = patch.channels;
    const std::size_t m = patch.points;
    if (weights.size() != m) throw DataError("histogram_feature: weight count != patch size");
    if (bin_edges.size() != ch * (bins + 1)) {
        throw DataError("histogram_feature: bin edge array has wrong shape");
    }
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t b = 0; b < bins; ++b) {
            if (!(bin_edges[c * (bins + 1) + b] < bin_edges[c * (bins + 1) + b + 1])) {
                throw DataError("histogram_feature: bin edges not strictly increasing");
            }
        }
    }

    HistogramStack stack;
    stack.channels = ch;
    stack.bins = bins;
    stack.values.assign(ch * bins, 0.0);
    stack.bin_edges.assign(bin_edges.begin(), bin_edges.end());

    for (std::size_t c = 0; c < ch; ++c) {
        const double* edges = bin_edges.data() + c * (bins + 1);
        double total = 0.0;
        for (std::size_t q = 0; q < m; ++q) {
            const double v = patch.data[q * ch + c];
            std::size_t b;
            if (v < edges[0]) {
                b = 0;
            } else if (v >= edges[bins]) {
                b = bins - 1;
            } else {
                // edges[b] <= v < edges[b+1]
                b = static_cast<std::size_t>(
                        std::upper_bound(edges, edges + bins + 1, v) - edges) - 1;
                b = std::min(b, bins - 1);
            }
            stack.values[c * bins + b] += weights[q];
            total += weights[q];
        }
        if (total > 0.0) {
            for (std::size_t b = 0; b < bins; ++b) stack.values[c * bins + b] /= total;
        }
    }
    return stack;
}

CovarianceFeature covariance_feature(const PointCloud& patch, std::span<const double> weights) {
    const std::size_t ch = patch.channels;
    const std::size_t m = patch.points;
    if (weights.size() != m) throw DataError("covariance_feature: weight count != patch size");

    CovarianceFeature feat;
    feat.channels = ch;
    feat.mean.assign(ch, 0.0);
    feat.covariance.assign(ch * ch, 0.0);

    for (std::size_t q = 0; q < m; ++q) {
        const double w = weights[q];
        for (std::size_t c = 0; c < ch; ++c) feat.mean[c] += w * patch.data[q * ch + c];
    }
    for (std::size_t q = 0; q < m; ++q) {
        const double w = weights[q];
        for (std::size_t a = 0; a < ch; ++a) {
            const double da = patch.data[q * ch + a] - feat.mean[a];
            for (std::size_t b = a; b < ch; ++b) {
                const double db = patch.data[q * ch + b] - feat.mean[b];
                feat.covariance[a * ch + b] += w * da * db;
            }
        }
    }
    for (std::size_t a = 0; a < ch; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            feat.covariance[a * ch + b] = feat.covariance[b * ch + a];
        }
    }
    return feat;
}

FeatureCache FeatureCache::build(const HighDimImage& image, const NeighborhoodSpec& spec,
                                 FeatureKind kind, std::size_t bins) {
    FeatureCache cache;
    cache.kind_ = kind;
    cache.n_ = image.pixel_count();
    cache.spec_ = spec;
    cache.weights_ = neighborhood_weights(spec);

    std::vector<double> edges;
    if (kind == FeatureKind::Histogram) {
        if (bins == 0) bins = rice_bins(spec.pixel_count());
        edges = global_bin_edges(image, bins);
        cache.histograms_.reserve(cache.n_);
    } else if (kind == FeatureKind::Covariance) {
        cache.covariances_.reserve(cache.n_);
    } else {
        cache.patches_.reserve(cache.n_);
    }

    for (std::size_t id = 0; id < cache.n_; ++id) {
        PointCloud patch = extract_patch(image, image.pixel_at(id), spec);
        switch (kind) {
            case FeatureKind::Histogram:
                cache.histograms_.push_back(
                    histogram_feature(patch, cache.weights_, edges, bins));
                break;
            case FeatureKind::Covariance:
                cache.covariances_.push_back(covariance_feature(patch, cache.weights_));
                break;
            case FeatureKind::PatchCloud:
                cache.patches_.push_back(std::move(patch));
                break;
        }
    }
    return cache;
}

void FeatureCache::dump(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const char* name = kind_ == FeatureKind::Histogram    ? "histogram"
                       : kind_ == FeatureKind::Covariance ? "covariance"
                                                          : "patch";
    out << "texdr-feature-cache " << name << " n=" << n_ << " eta=" << spec_.radius << "\n";
    auto write_block = [&out](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    for (std::size_t i = 0; i < n_; ++i) {
        switch (kind_) {
            case FeatureKind::Histogram: write_block(histograms_[i].values); break;
            case FeatureKind::Covariance:
                write_block(covariances_[i].mean);
                write_block(covariances_[i].covariance);
                break;
            case FeatureKind::PatchCloud: write_block(patches_[i].data); break;
        }
    }
}

} // namespace texdr

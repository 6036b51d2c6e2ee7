#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "texdr/image.hpp"
#include "texdr/neighborhood.hpp"

namespace texdr {

/// Rice rule bin count: B = ceil(2 * M^(1/3)).
std::size_t rice_bins(std::size_t neighborhood_pixels);

/// One normalized histogram per channel over a shared per-channel bin grid.
struct HistogramStack {
    std::size_t channels = 0;
    std::size_t bins = 0;
    std::vector<double> values;    // channels x bins, each row sums to 1
    std::vector<double> bin_edges; // channels x (bins + 1), strictly increasing per channel

    std::span<const double> channel(std::size_t c) const {
        return {values.data() + c * bins, bins};
    }
};

/// Weighted mean vector and population covariance matrix of a patch.
struct CovarianceFeature {
    std::size_t channels = 0;
    std::vector<double> mean;       // C
    std::vector<double> covariance; // C x C, symmetric

    double cov(std::size_t a, std::size_t b) const { return covariance[a * channels + b]; }
};

/// Uniform-width bin edges per channel spanning the global channel range of
/// the image. All pixels share one bin grid so histogram distances compare
/// like with like.
std::vector<double> global_bin_edges(const HighDimImage& image, std::size_t bins);

/// Histogram per channel; each member pixel contributes its weight to the
/// bin its value falls in. Values outside the edge range clamp into the
/// first/last bin.
HistogramStack histogram_feature(const PointCloud& patch, std::span<const double> weights,
                                 std::span<const double> bin_edges, std::size_t bins);

/// Weighted mean and population covariance (weights sum to 1, no Bessel
/// correction); uniform weights reduce to the plain population form.
CovarianceFeature covariance_feature(const PointCloud& patch, std::span<const double> weights);

enum class FeatureKind { Histogram, Covariance, PatchCloud };

/// Per-pixel precomputed features for one image + neighborhood spec.
/// Immutable after build; safe to share across threads.
class FeatureCache {
public:
    static FeatureCache build(const HighDimImage& image, const NeighborhoodSpec& spec,
                              FeatureKind kind, std::size_t bins = 0);

    FeatureKind kind() const { return kind_; }
    std::size_t size() const { return n_; }
    const NeighborhoodSpec& spec() const { return spec_; }
    const std::vector<double>& weights() const { return weights_; }

    const HistogramStack& histogram(std::size_t pixel) const { return histograms_[pixel]; }
    const CovarianceFeature& covariance(std::size_t pixel) const { return covariances_[pixel]; }
    const PointCloud& patch(std::size_t pixel) const { return patches_[pixel]; }

    /// Debug dump; format is documented in the README but not stable.
    void dump(const std::string& path) const;

private:
    FeatureKind kind_ = FeatureKind::PatchCloud;
    std::size_t n_ = 0;
    NeighborhoodSpec spec_;
    std::vector<double> weights_;
    std::vector<HistogramStack> histograms_;
    std::vector<CovarianceFeature> covariances_;
    std::vector<PointCloud> patches_;
};

} // namespace texdr

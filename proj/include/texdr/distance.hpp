#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "texdr/features.hpp"
#include "texdr/image.hpp"
#include "texdr/neighborhood.hpp"

namespace texdr {

enum class DistanceTag {
    EuclideanSq,
    QfHistogram,
    Bhattacharyya,
    Chamfer,
    Hausdorff,
    HausdorffMedian,
    Ssd,
};

struct DistanceKind {
    DistanceTag tag = DistanceTag::EuclideanSq;
    NeighborhoodSpec spec;        // texture-aware kinds only
    std::size_t bins = 0;         // qf-histogram; 0 means Rice rule from M
    double ridge = 1e-6;          // bhattacharyya: relative ridge scale

    bool texture_aware() const { return tag != DistanceTag::EuclideanSq; }
};

/// Bin-similarity matrix A with a_bk = 1 - |b - k| / B, unit diagonal.
/// Construction verifies A is numerically positive semi-definite so the
/// quadratic form cannot go negative.
struct QfBinSimilarity {
    std::size_t bins = 0;
    std::vector<double> matrix; // B x B, symmetric

    double at(std::size_t b, std::size_t k) const { return matrix[b * bins + k]; }
};

QfBinSimilarity qf_bin_similarity(std::size_t bins);

double euclidean_sq(std::span<const double> a, std::span<const double> b);

/// Per-channel quadratic-form histogram distance, summed over channels.
double qf_distance(const HistogramStack& a, const HistogramStack& b,
                   const QfBinSimilarity& similarity);

/// Bhattacharyya distance between (mean, covariance) features. `ridge_scale`
/// is relative: each matrix gets ridge_scale * trace/C added to its diagonal
/// before LU inversion/determinants (an absolute fallback of ridge_scale
/// itself covers zero-trace matrices from constant patches).
double bhattacharyya_distance(const CovarianceFeature& a, const CovarianceFeature& b,
                              double ridge_scale);

// Point-cloud family; inner metric is squared Euclidean throughout.
double chamfer_distance(const PointCloud& a, const PointCloud& b);
double chamfer_distance_weighted(const PointCloud& a, const PointCloud& b,
                                 std::span<const double> weights_a,
                                 std::span<const double> weights_b);
double hausdorff_distance(const PointCloud& a, const PointCloud& b);
double hausdorff_distance_weighted(const PointCloud& a, const PointCloud& b,
                                   std::span<const double> weights_a,
                                   std::span<const double> weights_b);
double hausdorff_median_distance(const PointCloud& a, const PointCloud& b);
double hausdorff_median_distance_weighted(const PointCloud& a, const PointCloud& b,
                                          std::span<const double> weights_a,
                                          std::span<const double> weights_b);
double ssd_distance(const PointCloud& a, const PointCloud& b);
double ssd_distance_weighted(const PointCloud& a, const PointCloud& b,
                             std::span<const double> weights_a,
                             std::span<const double> weights_b);

/// Pairwise pixel distance under one DistanceKind, backed by a precomputed
/// feature cache. Immutable after construction; re-entrant.
class DistanceEvaluator {
public:
    DistanceEvaluator(const HighDimImage& image, DistanceKind kind);

    double operator()(std::size_t pixel_i, std::size_t pixel_j) const;

    const DistanceKind& kind() const { return kind_; }
    std::size_t point_count() const { return n_; }
    const FeatureCache* cache() const { return cache_.get(); }

private:
    const HighDimImage* image_;
    DistanceKind kind_;
    std::size_t n_ = 0;
    std::shared_ptr<const FeatureCache> cache_;
    QfBinSimilarity similarity_;
    bool weighted_ = false;
    // bhattacharyya fast path: per-pixel ridge and log-determinant of the
    // ridged covariance, so each pair costs a single LU of the pooled matrix
    // Per-pixel [covariance, mean, ridge, log det] records, stored
    // contiguously so a pair evaluation touches two flat streams.
    std::vector<double> bhat_flat_;
    std::size_t bhat_stride_ = 0;
    std::size_t bhat_channels_ = 0;

    double bhattacharyya_pair(std::size_t i, std::size_t j) const;
};

} // namespace texdr

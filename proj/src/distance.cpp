#include "texdr/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "texdr/errors.hpp"
#include "texdr/linalg.hpp"

namespace texdr {

QfBinSimilarity qf_bin_similarity(std::size_t bins) {
    if (bins < 1) throw ConfigError("qf_bin_similarity: B must be at least 1");
    QfBinSimilarity sim;
    sim.bins = bins;
    sim.matrix.resize(bins * bins);
    const double inv_b = 1.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t k = 0; k < bins; ++k) {
            const double diff = static_cast<double>(b > k ? b - k : k - b);
            sim.matrix[b * bins + k] = 1.0 - diff * inv_b;
        }
    }
    const auto eig = symmetric_eigenvalues(sim.matrix, bins);
    if (eig.front() < -1e-10) {
        throw NumericalError("qf_bin_similarity: B=" + std::to_string(bins) +
                             " yields an indefinite similarity matrix");
    }
    return sim;
}

double euclidean_sq(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("euclidean_sq: vector length mismatch");
    double acc = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        acc += d * d;
    }
    return acc;
}

double qf_distance(const HistogramStack& a, const HistogramStack& b,
                   const QfBinSimilarity& similarity) {
    if (a.channels != b.channels || a.bins != b.bins || a.bins != similarity.bins) {
        throw DataError("qf_distance: histogram shape mismatch");
    }
    const std::size_t bins = a.bins;
    double total = 0.0;
    thread_local std::vector<double> diff;
    diff.resize(bins);
    for (std::size_t c = 0; c < a.channels; ++c) {
        const auto ha = a.channel(c);
        const auto hb = b.channel(c);
        for (std::size_t k = 0; k < bins; ++k) diff[k] = ha[k] - hb[k];
        for (std::size_t i = 0; i < bins; ++i) {
            double row = 0.0;
            for (std::size_t k = 0; k < bins; ++k) row += similarity.matrix[i * bins + k] * diff[k];
            total += diff[i] * row;
        }
    }
    return total;
}

namespace {

// ridge_scale * trace/C, falling back to ridge_scale itself for
// zero-trace matrices (constant patches).
double ridge_for(const CovarianceFeature& f, double ridge_scale) {
    if (ridge_scale <= 0.0) return 0.0;
    double trace = 0.0;
    for (std::size_t c = 0; c < f.channels; ++c) trace += f.cov(c, c);
    const double scale = trace / static_cast<double>(f.channels);
    return ridge_scale * (scale > 0.0 ? scale : 1.0);
}

} // namespace

double bhattacharyya_distance(const CovarianceFeature& a, const CovarianceFeature& b,
                              double ridge_scale) {
    if (a.channels != b.channels) throw DataError("bhattacharyya: channel count mismatch");
    const std::size_t c = a.channels;
    const double ridge_a = ridge_for(a, ridge_scale);
    const double ridge_b = ridge_for(b, ridge_scale);

    // This is the hot kernel of the whole pipeline; keep it allocation-free
    // after the first call on each thread.
    struct Workspace {
        LuDecomposition lu;
        std::vector<double> sigma_a, sigma_b, pooled, delta, solved;
    };
    thread_local Workspace w;
    w.sigma_a.assign(a.covariance.begin(), a.covariance.end());
    w.sigma_b.assign(b.covariance.begin(), b.covariance.end());
    for (std::size_t i = 0; i < c; ++i) {
        w.sigma_a[i * c + i] += ridge_a;
        w.sigma_b[i * c + i] += ridge_b;
    }
    w.pooled.resize(c * c);
    for (std::size_t i = 0; i < c * c; ++i) w.pooled[i] = 0.5 * (w.sigma_a[i] + w.sigma_b[i]);

    w.lu.compute(w.sigma_a, c);
    const double det_a = w.lu.determinant();
    w.lu.compute(w.sigma_b, c);
    const double det_b = w.lu.determinant();
    w.lu.compute(w.pooled, c);
    const double det_pooled = w.lu.determinant();
    if (det_a <= 0.0 || det_b <= 0.0 || det_pooled <= 0.0) {
        throw NumericalError("bhattacharyya: covariance singular after regularization");
    }

    w.delta.resize(c);
    for (std::size_t i = 0; i < c; ++i) w.delta[i] = a.mean[i] - b.mean[i];
    w.solved.assign(w.delta.begin(), w.delta.end());
    w.lu.solve(w.solved);
    double mean_term = 0.0;
    for (std::size_t i = 0; i < c; ++i) mean_term += w.delta[i] * w.solved[i];
    mean_term /= 8.0;

    const double log_term = 0.5 * std::log(det_pooled / std::sqrt(det_a * det_b));
    return mean_term + log_term;
}

namespace {

// Nearest squared distance from row q of `from` to any row of `to`.
double min_sq_to_cloud(const PointCloud& from, std::size_t q, const PointCloud& to) {
    const std::size_t ch = from.channels;
    const double* g = from.data.data() + q * ch;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < to.points; ++p) {
        const double* h = to.data.data() + p * ch;
        double acc = 0.0;
        for (std::size_t k = 0; k < ch; ++k) {
            const double d = g[k] - h[k];
            acc += d * d;
        }
        best = std::min(best, acc);
    }
    return best;
}

void check_clouds(const PointCloud& a, const PointCloud& b) {
    if (a.channels != b.channels) throw DataError("point clouds have different channel counts");
    if (a.points == 0 || b.points == 0) throw DataError("empty point cloud");
}

double median(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m % 2 == 1) return values[m / 2];
    return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

} // namespace

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
    check_clouds(a, b);
    double forward = 0.0, backward = 0.0;
    for (std::size_t q = 0; q < a.points; ++q) forward += min_sq_to_cloud(a, q, b);
    for (std::size_t p = 0; p < b.points; ++p) backward += min_sq_to_cloud(b, p, a);
    return forward / static_cast<double>(a.points) + backward / static_cast<double>(b.points);
}

double chamfer_distance_weighted(const PointCloud& a, const PointCloud& b,
                                 std::span<const double> weights_a,
                                 std::span<const double> weights_b) {
    check_clouds(a, b);
    if (weights_a.size() != a.points || weights_b.size() != b.points) {
        throw DataError("chamfer: weight count mismatch");
    }
    double forward = 0.0, backward = 0.0;
    for (std::size_t q = 0; q < a.points; ++q)
        forward += weights_a[q] * min_sq_to_cloud(a, q, b);
    for (std::size_t p = 0; p < b.points; ++p)
        backward += weights_b[p] * min_sq_to_cloud(b, p, a);
    return forward + backward;
}

double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
    check_clouds(a, b);
    double worst = 0.0;
    for (std::size_t q = 0; q < a.points; ++q)
        worst = std::max(worst, min_sq_to_cloud(a, q, b));
    for (std::size_t p = 0; p < b.points; ++p)
        worst = std::max(worst, min_sq_to_cloud(b, p, a));
    return worst;
}

double hausdorff_distance_weighted(const PointCloud& a, const PointCloud& b,
                                   std::span<const double> weights_a,
                                   std::span<const double> weights_b) {
    check_clouds(a, b);
    double worst = 0.0;
    for (std::size_t q = 0; q < a.points; ++q)
        worst = std::max(worst, weights_a[q] * min_sq_to_cloud(a, q, b));
    for (std::size_t p = 0; p < b.points; ++p)
        worst = std::max(worst, weights_b[p] * min_sq_to_cloud(b, p, a));
    return worst;
}

double hausdorff_median_distance(const PointCloud& a, const PointCloud& b) {
    check_clouds(a, b);
    std::vector<double> forward(a.points), backward(b.points);
    for (std::size_t q = 0; q < a.points; ++q) forward[q] = min_sq_to_cloud(a, q, b);
    for (std::size_t p = 0; p < b.points; ++p) backward[p] = min_sq_to_cloud(b, p, a);
    return 0.5 * (median(forward) + median(backward));
}

double hausdorff_median_distance_weighted(const PointCloud& a, const PointCloud& b,
                                          std::span<const double> weights_a,
                                          std::span<const double> weights_b) {
    check_clouds(a, b);
    std::vector<double> forward(a.points), backward(b.points);
    for (std::size_t q = 0; q < a.points; ++q)
        forward[q] = weights_a[q] * min_sq_to_cloud(a, q, b);
    for (std::size_t p = 0; p < b.points; ++p)
        backward[p] = weights_b[p] * min_sq_to_cloud(b, p, a);
    return 0.5 * (median(forward) + median(backward));
}

double ssd_distance(const PointCloud& a, const PointCloud& b) {
    check_clouds(a, b);
    const std::size_t ch = a.channels;
    double total = 0.0;
    for (std::size_t q = 0; q < a.points; ++q) {
        const double* g = a.data.data() + q * ch;
        for (std::size_t p = 0; p < b.points; ++p) {
            const double* h = b.data.data() + p * ch;
            double acc = 0.0;
            for (std::size_t k = 0; k < ch; ++k) {
                const double d = g[k] - h[k];
                acc += d * d;
            }
            total += acc;
        }
    }
    return 2.0 * total / (static_cast<double>(a.points) * static_cast<double>(b.points));
}

double ssd_distance_weighted(const PointCloud& a, const PointCloud& b,
                             std::span<const double> weights_a,
                             std::span<const double> weights_b) {
    check_clouds(a, b);
    const std::size_t ch = a.channels;
    double total = 0.0;
    for (std::size_t q = 0; q < a.points; ++q) {
        const double* g = a.data.data() + q * ch;
        for (std::size_t p = 0; p < b.points; ++p) {
            const double* h = b.data.data() + p * ch;
            double acc = 0.0;
            for (std::size_t k = 0; k < ch; ++k) {
                const double d = g[k] - h[k];
                acc += d * d;
            }
            total += (weights_a[q] + weights_b[p]) * acc;
        }
    }
    return 2.0 * total / (static_cast<double>(a.points) * static_cast<double>(b.points));
}

DistanceEvaluator::DistanceEvaluator(const HighDimImage& image, DistanceKind kind)
    : image_(&image), kind_(kind), n_(image.pixel_count()) {
    weighted_ = kind_.spec.weighting == WeightingScheme::Gaussian;
    switch (kind_.tag) {
        case DistanceTag::EuclideanSq:
            break;
        case DistanceTag::QfHistogram: {
            if (kind_.bins == 0) kind_.bins = rice_bins(kind_.spec.pixel_count());
            similarity_ = qf_bin_similarity(kind_.bins);
            cache_ = std::make_shared<FeatureCache>(
                FeatureCache::build(image, kind_.spec, FeatureKind::Histogram, kind_.bins));
            break;
        }
        case DistanceTag::Bhattacharyya: {
            cache_ = std::make_shared<FeatureCache>(
                FeatureCache::build(image, kind_.spec, FeatureKind::Covariance));
            // Pack covariance, mean, ridge, and the log-determinant of the
            // ridged covariance contiguously per pixel: one record per cache
            // stream instead of chasing through per-feature vectors.
            bhat_channels_ = image.channels();
            const std::size_t c = bhat_channels_;
            bhat_stride_ = c * c + c + 2;
            bhat_flat_.resize(n_ * bhat_stride_);
            LuDecomposition lu;
            std::vector<double> ridged;
            for (std::size_t p = 0; p < n_; ++p) {
                const CovarianceFeature& f = cache_->covariance(p);
                const double ridge = ridge_for(f, kind_.ridge);
                ridged.assign(f.covariance.begin(), f.covariance.end());
                for (std::size_t i = 0; i < c; ++i) ridged[i * c + i] += ridge;
                lu.compute(ridged, c);
                const double det = lu.determinant();
                if (det <= 0.0) {
                    throw NumericalError(
                        "bhattacharyya: singular covariance for pixel " + std::to_string(p));
                }
                double* rec = bhat_flat_.data() + p * bhat_stride_;
                std::copy(f.covariance.begin(), f.covariance.end(), rec);
                std::copy(f.mean.begin(), f.mean.end(), rec + c * c);
                rec[c * c + c] = ridge;
                rec[c * c + c + 1] = std::log(det);
            }
            break;
        }
        default:
            cache_ = std::make_shared<FeatureCache>(
                FeatureCache::build(image, kind_.spec, FeatureKind::PatchCloud));
            break;
    }
}

namespace {

// Pooled-covariance Bhattacharyya distance over two packed per-pixel records
// laid out as [covariance (c*c), mean (c), ridge, log det]. When kFixed > 0
// the channel count is a compile-time constant and every loop below fully
// unrolls, which matters for the small matrices common in practice.
[[noreturn]] [[gnu::cold]] [[gnu::noinline]] void throw_singular_pooled(std::size_t i,
                                                                        std::size_t j) {
    throw NumericalError("bhattacharyya: singular pooled covariance for pixel pair (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
}

template <std::size_t kFixed>
double bhattacharyya_record_pair(std::size_t c_runtime, const double* ra, const double* rb,
                                 double* m, std::size_t i, std::size_t j) {
    const std::size_t c = kFixed > 0 ? kFixed : c_runtime;
    double* x = m + c * c;     // mean difference, overwritten by the solve
    double* pinv = x + c;      // reciprocal pivots, reused by the back substitution
    const double* mean_a = ra + c * c;
    const double* mean_b = rb + c * c;

    for (std::size_t s = 0; s < c * c; ++s) m[s] = 0.5 * (ra[s] + rb[s]);
    const double pooled_ridge = 0.5 * (ra[c * c + c] + rb[c * c + c]);
    for (std::size_t s = 0; s < c; ++s) m[s * c + s] += pooled_ridge;
    for (std::size_t s = 0; s < c; ++s) x[s] = mean_a[s] - mean_b[s];

    // In-place LU without pivoting, fused with the forward substitution.
    // Pivot-free elimination is stable here because the ridged pooled matrix
    // is symmetric positive definite, so every pivot stays positive.
    double det_pooled = 1.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) {
        const double pivot = m[k * c + k];
        min_pivot = std::min(min_pivot, pivot);
        det_pooled *= pivot;
        const double inv = 1.0 / pivot;
        pinv[k] = inv;
        for (std::size_t r = k + 1; r < c; ++r) {
            const double f = m[r * c + k] * inv;
            for (std::size_t col = k + 1; col < c; ++col) m[r * c + col] -= f * m[k * c + col];
            x[r] -= f * x[k];
        }
    }
    if (!(min_pivot > 0.0) || !(det_pooled > 0.0)) throw_singular_pooled(i, j);

    // Back substitution against U, accumulating delta' * pooled^{-1} * delta.
    double mean_term = 0.0;
    for (std::size_t r = c; r-- > 0;) {
        double v = x[r];
        for (std::size_t col = r + 1; col < c; ++col) v -= m[r * c + col] * x[col];
        v *= pinv[r];
        x[r] = v;
        mean_term += (mean_a[r] - mean_b[r]) * v;
    }

    const double log_det_sum = ra[c * c + c + 1] + rb[c * c + c + 1];
    return mean_term / 8.0 + 0.5 * (std::log(det_pooled) - 0.5 * log_det_sum);
}

template <std::size_t kFixed>
[[gnu::always_inline]] inline double bhattacharyya_fixed(const double* ra, const double* rb,
                                                         std::size_t i, std::size_t j) {
    double buf[kFixed * (kFixed + 2)];
    return bhattacharyya_record_pair<kFixed>(kFixed, ra, rb, buf, i, j);
}

// Closed forms for one and two channels: the pooled system solves by scalar
// division / the 2x2 adjugate, so no elimination pass is needed.
[[gnu::always_inline]] inline double bhattacharyya_1ch(const double* ra, const double* rb,
                                                       std::size_t i, std::size_t j) {
    const double pooled = 0.5 * (ra[0] + rb[0]) + 0.5 * (ra[2] + rb[2]);
    if (!(pooled > 0.0)) throw_singular_pooled(i, j);
    const double delta = ra[1] - rb[1];
    return delta * delta / (8.0 * pooled) +
           0.5 * (std::log(pooled) - 0.5 * (ra[3] + rb[3]));
}

[[gnu::always_inline]] inline double bhattacharyya_2ch(const double* ra, const double* rb,
                                                       std::size_t i, std::size_t j) {
    const double ridge = 0.5 * (ra[6] + rb[6]);
    const double p00 = 0.5 * (ra[0] + rb[0]) + ridge;
    const double p01 = 0.5 * (ra[1] + rb[1]);
    const double p11 = 0.5 * (ra[3] + rb[3]) + ridge;
    const double det = p00 * p11 - p01 * p01;
    if (!(det > 0.0) || !(p00 > 0.0)) throw_singular_pooled(i, j);
    const double d0 = ra[4] - rb[4];
    const double d1 = ra[5] - rb[5];
    const double quad = p11 * d0 * d0 - 2.0 * p01 * d0 * d1 + p00 * d1 * d1;
    return quad / (8.0 * det) + 0.5 * (std::log(det) - 0.5 * (ra[7] + rb[7]));
}

} // namespace

double DistanceEvaluator::bhattacharyya_pair(std::size_t i, std::size_t j) const {
    const std::size_t c = bhat_channels_;
    const double* ra = bhat_flat_.data() + i * bhat_stride_;
    const double* rb = bhat_flat_.data() + j * bhat_stride_;

    switch (c) {
        case 1: return bhattacharyya_1ch(ra, rb, i, j);
        case 2: return bhattacharyya_2ch(ra, rb, i, j);
        case 3: return bhattacharyya_fixed<3>(ra, rb, i, j);
        case 4: return bhattacharyya_fixed<4>(ra, rb, i, j);
        case 5: return bhattacharyya_fixed<5>(ra, rb, i, j);
        case 6: return bhattacharyya_fixed<6>(ra, rb, i, j);
        case 7: return bhattacharyya_fixed<7>(ra, rb, i, j);
        case 8: return bhattacharyya_fixed<8>(ra, rb, i, j);
        default: break;
    }

    // Runtime-dimension fallback: robust partial-pivoted LU, as appropriate
    // when the dimension (and conditioning head-room) is not known statically.
    struct Workspace {
        LuDecomposition lu;
        std::vector<double> pooled, delta, solved;
    };
    thread_local Workspace w;
    w.pooled.resize(c * c);
    for (std::size_t s = 0; s < c * c; ++s) w.pooled[s] = 0.5 * (ra[s] + rb[s]);
    const double pooled_ridge = 0.5 * (ra[c * c + c] + rb[c * c + c]);
    for (std::size_t s = 0; s < c; ++s) w.pooled[s * c + s] += pooled_ridge;

    w.lu.compute(w.pooled, c);
    const double det_pooled = w.lu.determinant();
    if (det_pooled <= 0.0) throw_singular_pooled(i, j);

    const double* mean_a = ra + c * c;
    const double* mean_b = rb + c * c;
    w.delta.resize(c);
    for (std::size_t s = 0; s < c; ++s) w.delta[s] = mean_a[s] - mean_b[s];
    w.solved.assign(w.delta.begin(), w.delta.end());
    w.lu.solve(w.solved);
    double mean_term = 0.0;
    for (std::size_t s = 0; s < c; ++s) mean_term += w.delta[s] * w.solved[s];

    const double log_det_sum = ra[c * c + c + 1] + rb[c * c + c + 1];
    return mean_term / 8.0 + 0.5 * (std::log(det_pooled) - 0.5 * log_det_sum);
}

double DistanceEvaluator::operator()(std::size_t i, std::size_t j) const {
    switch (kind_.tag) {
        case DistanceTag::EuclideanSq:
            return euclidean_sq(image_->pixel(i), image_->pixel(j));
        case DistanceTag::QfHistogram:
            return qf_distance(cache_->histogram(i), cache_->histogram(j), similarity_);
        case DistanceTag::Bhattacharyya:
            return bhattacharyya_pair(i, j);
        case DistanceTag::Chamfer:
            return weighted_ ? chamfer_distance_weighted(cache_->patch(i), cache_->patch(j),
                                                         cache_->weights(), cache_->weights())
                             : chamfer_distance(cache_->patch(i), cache_->patch(j));
        case DistanceTag::Hausdorff:
            return weighted_ ? hausdorff_distance_weighted(cache_->patch(i), cache_->patch(j),
                                                           cache_->weights(), cache_->weights())
                             : hausdorff_distance(cache_->patch(i), cache_->patch(j));
        case DistanceTag::HausdorffMedian:
            return weighted_
                       ? hausdorff_median_distance_weighted(cache_->patch(i), cache_->patch(j),
                                                            cache_->weights(), cache_->weights())
                       : hausdorff_median_distance(cache_->patch(i), cache_->patch(j));
        case DistanceTag::Ssd:
            return weighted_ ? ssd_distance_weighted(cache_->patch(i), cache_->patch(j),
                                                     cache_->weights(), cache_->weights())
                             : ssd_distance(cache_->patch(i), cache_->patch(j));
    }
    throw ConfigError("unknown distance kind");
}

} // namespace texdr

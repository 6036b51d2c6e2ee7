#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "texdr/errors.hpp"
#include "texdr/features.hpp"
#include "texdr/linalg.hpp"

using namespace texdr;

namespace {

PointCloud make_cloud(std::size_t points, std::size_t channels, std::vector<double> data) {
    return PointCloud{points, channels, std::move(data)};
}

std::vector<double> uniform_weights(std::size_t m) {
    return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

// Independent oracle: textbook population covariance by naive double loop.
std::vector<double> naive_population_cov(const PointCloud& patch) {
    const std::size_t m = patch.points, c = patch.channels;
    std::vector<double> mean(c, 0.0), cov(c * c, 0.0);
    for (std::size_t q = 0; q < m; ++q)
        for (std::size_t a = 0; a < c; ++a) mean[a] += patch.data[q * c + a];
    for (auto& v : mean) v /= static_cast<double>(m);
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            double acc = 0.0;
            for (std::size_t q = 0; q < m; ++q)
                acc += (patch.data[q * c + a] - mean[a]) * (patch.data[q * c + b] - mean[b]);
            cov[a * c + b] = acc / static_cast<double>(m);
        }
    return cov;
}

} // namespace

TEST_CASE("rice rule table") {
    CHECK(rice_bins(9) == 5);
    CHECK(rice_bins(25) == 6);
    CHECK(rice_bins(49) == 8);
    CHECK(rice_bins(81) == 9);
    CHECK(rice_bins(1) == 2);
}

TEST_CASE("histogram: identical values land in one bin") {
    auto patch = make_cloud(9, 1, std::vector<double>(9, 0.4));
    std::vector<double> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const auto stack = histogram_feature(patch, uniform_weights(9), edges, 5);
    double mass = 0.0;
    int nonzero = 0;
    for (std::size_t b = 0; b < 5; ++b) {
        mass += stack.channel(0)[b];
        if (stack.channel(0)[b] > 0) ++nonzero;
    }
    CHECK(nonzero == 1);
    CHECK(stack.channel(0)[2] == doctest::Approx(1.0));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram: hand-counted bins") {
    auto patch = make_cloud(4, 1, {0.1, 0.15, 0.3, 0.35});
    std::vector<double> edges{0.0, 0.25, 0.5, 0.75};
    const auto stack = histogram_feature(patch, uniform_weights(4), edges, 3);
    CHECK(stack.channel(0)[0] == doctest::Approx(0.5));
    CHECK(stack.channel(0)[1] == doctest::Approx(0.5));
    CHECK(stack.channel(0)[2] == doctest::Approx(0.0));
}

TEST_CASE("histogram: gaussian weights put the center weight in its bin") {
    NeighborhoodSpec spec{1, WeightingScheme::Gaussian, 0.0, BorderPolicy::Clamp};
    const auto weights = neighborhood_weights(spec);
    // center (offset idx 4) in bin 2, the 8-ring in bin 0
    std::vector<double> values(9, 0.1);
    values[4] = 0.55;
    auto patch = make_cloud(9, 1, std::move(values));
    std::vector<double> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const auto stack = histogram_feature(patch, weights, edges, 5);
    CHECK(stack.channel(0)[2] == doctest::Approx(weights[4]).epsilon(1e-12));
    CHECK(stack.channel(0)[0] == doctest::Approx(1.0 - weights[4]).epsilon(1e-12));
}

TEST_CASE("histogram: out-of-range values clamp into edge bins") {
    auto patch = make_cloud(3, 1, {-5.0, 0.5, 99.0});
    std::vector<double> edges{0.0, 0.5, 1.0};
    const auto stack = histogram_feature(patch, uniform_weights(3), edges, 2);
    CHECK(stack.channel(0)[0] == doctest::Approx(1.0 / 3.0));
    CHECK(stack.channel(0)[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("histogram: non-monotone edges rejected") {
    auto patch = make_cloud(1, 1, {0.5});
    std::vector<double> edges{0.0, 0.6, 0.4};
    CHECK_THROWS_AS(histogram_feature(patch, uniform_weights(1), edges, 2), DataError);
}

TEST_CASE("histogram rows sum to 1 and are permutation invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> data(9 * 2);
        for (auto& v : data) v = value(rng);
        auto patch = make_cloud(9, 2, data);
        std::vector<double> edges{0, 0.25, 0.5, 0.75, 1.0, 0, 0.25, 0.5, 0.75, 1.0};
        const auto a = histogram_feature(patch, uniform_weights(9), edges, 4);
        for (std::size_t c = 0; c < 2; ++c) {
            double sum = 0.0;
            for (double v : a.channel(c)) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        // permute rows (uniform weights: histogram must not change)
        std::vector<std::size_t> perm(9);
        for (std::size_t i = 0; i < 9; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> permuted(9 * 2);
        for (std::size_t q = 0; q < 9; ++q)
            for (std::size_t c = 0; c < 2; ++c) permuted[q * 2 + c] = data[perm[q] * 2 + c];
        const auto b = histogram_feature(make_cloud(9, 2, permuted), uniform_weights(9), edges, 4);
        for (std::size_t i = 0; i < a.values.size(); ++i)
            CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("covariance: constant patch") {
    auto patch = make_cloud(9, 2, std::vector<double>(18, 2.0));
    const auto feat = covariance_feature(patch, uniform_weights(9));
    CHECK(feat.mean[0] == doctest::Approx(2.0));
    CHECK(feat.mean[1] == doctest::Approx(2.0));
    for (double v : feat.covariance) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("covariance: C=1 values {0,2} gives mu=1 sigma=1") {
    auto patch = make_cloud(2, 1, {0.0, 2.0});
    const auto feat = covariance_feature(patch, uniform_weights(2));
    CHECK(feat.mean[0] == doctest::Approx(1.0));
    CHECK(feat.covariance[0] == doctest::Approx(1.0));
}

TEST_CASE("covariance: linearly dependent channels give rank-1 sigma") {
    auto patch = make_cloud(4, 2, {1, 2, 2, 4, 3, 6, 0, 0});
    const auto feat = covariance_feature(patch, uniform_weights(4));
    CHECK(feat.cov(0, 1) == doctest::Approx(2.0 * feat.cov(0, 0)).epsilon(1e-12));
    CHECK(feat.cov(1, 1) == doctest::Approx(4.0 * feat.cov(0, 0)).epsilon(1e-12));
    const double det = feat.cov(0, 0) * feat.cov(1, 1) - feat.cov(0, 1) * feat.cov(1, 0);
    CHECK(std::abs(det) < 1e-12);
}

TEST_CASE("uniform-weight covariance equals naive population covariance") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> value(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 9, c = 3;
        std::vector<double> data(m * c);
        for (auto& v : data) v = value(rng);
        auto patch = make_cloud(m, c, data);
        const auto feat = covariance_feature(patch, uniform_weights(m));
        const auto oracle = naive_population_cov(patch);
        for (std::size_t i = 0; i < oracle.size(); ++i)
            CHECK(feat.covariance[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
}

TEST_CASE("covariance is symmetric PSD and scales with channel scaling") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<double> data(25 * 2);
    for (auto& v : data) v = value(rng);
    auto patch = make_cloud(25, 2, data);
    const auto feat = covariance_feature(patch, uniform_weights(25));

    CHECK(feat.cov(0, 1) == doctest::Approx(feat.cov(1, 0)).epsilon(1e-12));
    const auto eig = symmetric_eigenvalues(feat.covariance, 2);
    CHECK(eig.front() >= -1e-10);

    const double s = 3.0;
    auto scaled_data = data;
    for (std::size_t q = 0; q < 25; ++q) scaled_data[q * 2] *= s;
    const auto scaled = covariance_feature(make_cloud(25, 2, scaled_data), uniform_weights(25));
    CHECK(scaled.cov(0, 0) == doctest::Approx(s * s * feat.cov(0, 0)).epsilon(1e-12));
    CHECK(scaled.cov(0, 1) == doctest::Approx(s * feat.cov(0, 1)).epsilon(1e-12));
    CHECK(scaled.cov(1, 1) == doctest::Approx(feat.cov(1, 1)).epsilon(1e-12));
}

TEST_CASE("weighted covariance: analytic two-point check") {
    // weights (0.25, 0.75), values (0, 1): mu* = 0.75,
    // sigma = 0.25*0.75^2 + 0.75*0.25^2 = 0.1875
    auto patch = make_cloud(2, 1, {0.0, 1.0});
    std::vector<double> w{0.25, 0.75};
    const auto feat = covariance_feature(patch, w);
    CHECK(feat.mean[0] == doctest::Approx(0.75));
    CHECK(feat.covariance[0] == doctest::Approx(0.1875));
}

TEST_CASE("global bin edges span the channel range") {
    HighDimImage img(2, 2, 2, {0.0, -1.0, 1.0, 0.0, 0.5, 3.0, 0.25, 1.0});
    const auto edges = global_bin_edges(img, 4);
    CHECK(edges[0] == doctest::Approx(0.0));  // channel 0 min
    CHECK(edges[4] == doctest::Approx(1.0));  // channel 0 max
    CHECK(edges[5] == doctest::Approx(-1.0)); // channel 1 min
    CHECK(edges[9] == doctest::Approx(3.0));  // channel 1 max
}

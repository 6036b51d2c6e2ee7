#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "texdr/errors.hpp"
#include "texdr/image.hpp"
#include "texdr/neighborhood.hpp"

using namespace texdr;

namespace {

HighDimImage random_image(std::size_t w, std::size_t h, std::size_t c, std::uint64_t seed) {
    HighDimImage img(w, h, c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-2.0, 5.0);
    for (auto& v : img.data()) v = value(rng);
    return img;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("texdr_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("image invariants at construction") {
    CHECK_THROWS_AS(HighDimImage(0, 4, 2), DataError);
    CHECK_THROWS_AS(HighDimImage(4, 4, 2, std::vector<double>(3)), DataError);
    CHECK_THROWS_AS(HighDimImage(1, 1, 1, {std::nan("")}), DataError);
}

TEST_CASE("flat-binary round-trip is bit exact") {
    TempDir dir;
    const auto img = random_image(7, 5, 3, 1);
    save_image(img, dir.file("img.bin"), ImageFormat::FlatBinary);
    const auto back = load_image(dir.file("img.bin"), ImageFormat::FlatBinary);
    CHECK(back == img);
}

TEST_CASE("csv round-trip within 1e-12") {
    TempDir dir;
    const auto img = random_image(6, 4, 2, 2);
    save_image(img, dir.file("img.csv"), ImageFormat::Csv);
    const auto back = load_image(dir.file("img.csv"), ImageFormat::Csv);
    REQUIRE(back.width() == img.width());
    REQUIRE(back.channels() == img.channels());
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("payload/header dimension mismatch is rejected") {
    TempDir dir;
    const auto img = random_image(2, 2, 1, 3);
    save_image(img, dir.file("img.bin"), ImageFormat::FlatBinary);
    // Truncate the payload: header says 4 pixels, payload holds 3.
    std::filesystem::resize_file(dir.file("img.bin"), 3 * sizeof(double));
    CHECK_THROWS_AS(load_image(dir.file("img.bin"), ImageFormat::FlatBinary), DataError);
}

TEST_CASE("missing file errors") {
    CHECK_THROWS_AS(load_image("/nonexistent/img.bin", ImageFormat::FlatBinary), DataError);
}

TEST_CASE("neighborhood members: degenerate and interior") {
    const auto img = random_image(32, 32, 2, 4);

    SUBCASE("eta=0 gives the center with weight 1") {
        NeighborhoodSpec spec{0, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};
        const auto members = neighborhood_members(img, {5, 7}, spec);
        REQUIRE(members.size() == 1);
        CHECK(members[0].first.x == 5);
        CHECK(members[0].first.y == 7);
        CHECK(members[0].second == doctest::Approx(1.0));
    }
    SUBCASE("eta=1 uniform interior gives 9 entries of 1/9") {
        NeighborhoodSpec spec{1, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};
        const auto members = neighborhood_members(img, {10, 10}, spec);
        REQUIRE(members.size() == 9);
        for (const auto& [p, w] : members) CHECK(w == doctest::Approx(1.0 / 9.0));
    }
    SUBCASE("eta=1 clamp at corner repeats the corner pixel 4 times") {
        NeighborhoodSpec spec{1, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};
        const auto members = neighborhood_members(img, {0, 0}, spec);
        REQUIRE(members.size() == 9);
        int corner_count = 0;
        for (const auto& [p, w] : members) {
            if (p.x == 0 && p.y == 0) ++corner_count;
        }
        CHECK(corner_count == 4);
    }
}

TEST_CASE("neighborhood size and weight normalization") {
    for (int eta : {0, 1, 2, 3}) {
        for (auto scheme : {WeightingScheme::Uniform, WeightingScheme::Gaussian}) {
            NeighborhoodSpec spec{eta, scheme, 0.0, BorderPolicy::Clamp};
            const auto w = neighborhood_weights(spec);
            const std::size_t side = 2 * static_cast<std::size_t>(eta) + 1;
            REQUIRE(w.size() == side * side);
            double sum = 0.0;
            for (double v : w) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("gaussian weights decrease with offset radius") {
    NeighborhoodSpec spec{2, WeightingScheme::Gaussian, 0.0, BorderPolicy::Clamp};
    const auto w = neighborhood_weights(spec);
    const std::size_t center = w.size() / 2;
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[center] >= w[i]);
}

TEST_CASE("extract_patch matches neighborhood_members order") {
    const auto img = random_image(8, 8, 3, 5);
    NeighborhoodSpec spec{1, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};

    SUBCASE("eta=0 is the center attribute vector") {
        NeighborhoodSpec zero{0, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};
        const auto patch = extract_patch(img, {3, 3}, zero);
        REQUIRE(patch.points == 1);
        const auto g = img.pixel(PixelIndex{3, 3});
        for (std::size_t c = 0; c < 3; ++c) CHECK(patch.row(0)[c] == g[c]);
    }
    SUBCASE("corner patch rows repeat clamped pixels exactly") {
        const auto members = neighborhood_members(img, {0, 0}, spec);
        const auto patch = extract_patch(img, {0, 0}, spec);
        REQUIRE(patch.points == members.size());
        for (std::size_t q = 0; q < patch.points; ++q) {
            const auto g = img.pixel(members[q].first);
            for (std::size_t c = 0; c < 3; ++c) CHECK(patch.row(q)[c] == g[c]);
        }
    }
}

TEST_CASE("constant image patch has identical rows") {
    HighDimImage img(4, 4, 2);
    for (auto& v : img.data()) v = 3.5;
    NeighborhoodSpec spec{1, WeightingScheme::Uniform, 0.0, BorderPolicy::Clamp};
    const auto patch = extract_patch(img, {2, 2}, spec);
    REQUIRE(patch.points == 9);
    for (std::size_t q = 0; q < 9; ++q) {
        CHECK(patch.row(q)[0] == 3.5);
        CHECK(patch.row(q)[1] == 3.5);
    }
}

TEST_CASE("gaussian filter on constant image is identity") {
    HighDimImage img(10, 10, 2);
    for (auto& v : img.data()) v = 1.25;
    const auto filtered = gaussian_filter(img, 5.0, 3);
    for (double v : filtered.data()) CHECK(v == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("gaussian filter impulse matches the normalized kernel") {
    // The paper's filter settings: sigma 5, ksize 3.
    const double sigma = 5.0;
    HighDimImage img(9, 9, 1);
    img.at(4, 4, 0) = 1.0;
    const auto filtered = gaussian_filter(img, sigma, 3);

    double kernel[3];
    double sum = 0.0;
    for (int t = -1; t <= 1; ++t) {
        kernel[t + 1] = std::exp(-0.5 * t * t / (sigma * sigma));
        sum += kernel[t + 1];
    }
    for (auto& v : kernel) v /= sum;

    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const double expected = kernel[dx + 1] * kernel[dy + 1];
            CHECK(filtered.at(static_cast<std::size_t>(4 + dx), static_cast<std::size_t>(4 + dy), 0) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
    // Interior impulse: total mass is preserved.
    double total = 0.0;
    for (double v : filtered.data()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gaussian filter commutes with channel permutation") {
    const auto img = random_image(6, 6, 3, 9);
    HighDimImage swapped(6, 6, 3);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
            swapped.at(x, y, 0) = img.at(x, y, 2);
            swapped.at(x, y, 1) = img.at(x, y, 0);
            swapped.at(x, y, 2) = img.at(x, y, 1);
        }
    const auto a = gaussian_filter(img, 1.0, 5);
    const auto b = gaussian_filter(swapped, 1.0, 5);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
            CHECK(b.at(x, y, 0) == doctest::Approx(a.at(x, y, 2)).epsilon(1e-15));
            CHECK(b.at(x, y, 1) == doctest::Approx(a.at(x, y, 0)).epsilon(1e-15));
        }
}

TEST_CASE("even ksize rejected") {
    HighDimImage img(4, 4, 1);
    CHECK_THROWS_AS(gaussian_filter(img, 1.0, 4), ConfigError);
}

TEST_CASE("normalize_channels") {
    SUBCASE("min-max maps {0,10} to {0,1}") {
        HighDimImage img(2, 1, 1, {0.0, 10.0});
        const auto out = normalize_channels(img, NormalizeMode::MinMax);
        CHECK(out.data()[0] == 0.0);
        CHECK(out.data()[1] == 1.0);
    }
    SUBCASE("constant channel maps to 0") {
        HighDimImage img(3, 1, 1, {4.0, 4.0, 4.0});
        const auto out = normalize_channels(img, NormalizeMode::MinMax);
        for (double v : out.data()) CHECK(v == 0.0);
    }
    SUBCASE("z-score of {1,2,3} has mean 0 sd 1") {
        HighDimImage img(3, 1, 1, {1.0, 2.0, 3.0});
        const auto out = normalize_channels(img, NormalizeMode::ZScore);
        double mean = 0.0, var = 0.0;
        for (double v : out.data()) mean += v;
        mean /= 3.0;
        for (double v : out.data()) var += (v - mean) * (v - mean);
        var /= 3.0;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
    }
}

TEST_CASE("label raster round trip") {
    TempDir dir;
    LabelRaster labels{3, 2, {0, 1, 2, 3, 4, 5}};
    save_labels(labels, dir.file("gt.csv"));
    const auto back = load_labels(dir.file("gt.csv"));
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.labels == labels.labels);
}

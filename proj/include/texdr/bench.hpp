#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "texdr/distance.hpp"

namespace texdr {

struct BenchRow {
    std::string kind;
    int eta = 0;
    std::size_t channels = 0;
    std::size_t bins = 0;
    std::size_t n_pairs = 0;
    double feature_mean_ns = 0.0; // feature extraction, per pixel
    double distance_mean_ns = 0.0;
    double distance_sd_ns = 0.0;
    double distance_best_ns = 0.0; // fastest repetition; robust to scheduler noise
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::size_t threads = 1;
    std::string build_flags;

    void save_csv(const std::string& path) const;
};

/// Times feature extraction and the distance kernel separately over seeded
/// random pixel pairs. Warm-up repetition is discarded; timings come from a
/// monotonic clock. Single-threaded by design.
BenchRow bench_kernel(const DistanceKind& kind, const HighDimImage& image,
                      std::size_t n_pairs, std::size_t repetitions, std::uint64_t seed = 0);

/// Least-squares slope of log(time) against log(size): the empirical
/// scaling exponent.
double fit_scaling_exponent(const std::vector<double>& sizes,
                            const std::vector<double>& times);

} // namespace texdr

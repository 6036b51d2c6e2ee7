#include "texdr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include "texdr/errors.hpp"

namespace texdr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point begin, Clock::time_point end) {
    return std::chrono::duration<double, std::nano>(end - begin).count();
}

const char* kind_name(DistanceTag tag) {
    switch (tag) {
        case DistanceTag::EuclideanSq: return "euclidean-sq";
        case DistanceTag::QfHistogram: return "qf-histogram";
        case DistanceTag::Bhattacharyya: return "bhattacharyya";
        case DistanceTag::Chamfer: return "chamfer";
        case DistanceTag::Hausdorff: return "hausdorff";
        case DistanceTag::HausdorffMedian: return "hausdorff-median";
        case DistanceTag::Ssd: return "ssd";
    }
    return "?";
}

} // namespace

BenchRow bench_kernel(const DistanceKind& kind, const HighDimImage& image,
                      std::size_t n_pairs, std::size_t repetitions, std::uint64_t seed) {
    if (n_pairs < 1) throw ConfigError("bench: n_pairs must be positive");
    if (repetitions < 1) repetitions = 1;

    const auto t0 = Clock::now();
    DistanceEvaluator evaluate(image, kind);
    const auto t1 = Clock::now();

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, image.pixel_count() - 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(n_pairs);
    for (auto& p : pairs) {
        p.first = pick(rng);
        do {
            p.second = pick(rng);
        } while (p.second == p.first);
    }

    volatile double sink = 0.0; // keep the kernel calls alive
    std::vector<double> per_rep;
    per_rep.reserve(repetitions);
    for (std::size_t rep = 0; rep <= repetitions; ++rep) { // rep 0 = warm-up
        const auto begin = Clock::now();
        double acc = 0.0;
        for (const auto& [i, j] : pairs) acc += evaluate(i, j);
        const auto end = Clock::now();
        sink = sink + acc;
        if (rep > 0) per_rep.push_back(elapsed_ns(begin, end) / static_cast<double>(n_pairs));
    }

    BenchRow row;
    row.kind = kind_name(kind.tag);
    row.eta = kind.spec.radius;
    row.channels = image.channels();
    row.bins = kind.tag == DistanceTag::QfHistogram ? evaluate.kind().bins : 0;
    row.n_pairs = n_pairs;
    row.feature_mean_ns =
        elapsed_ns(t0, t1) / static_cast<double>(image.pixel_count());
    double mean = 0.0;
    for (double v : per_rep) mean += v;
    mean /= static_cast<double>(per_rep.size());
    double var = 0.0;
    for (double v : per_rep) var += (v - mean) * (v - mean);
    var /= static_cast<double>(per_rep.size());
    row.distance_mean_ns = mean;
    row.distance_sd_ns = std::sqrt(var);
    row.distance_best_ns = *std::min_element(per_rep.begin(), per_rep.end());
    return row;
}

double fit_scaling_exponent(const std::vector<double>& sizes,
                            const std::vector<double>& times) {
    if (sizes.size() != times.size() || sizes.size() < 2) {
        throw ConfigError("fit_scaling_exponent: need matching series of length >= 2");
    }
    const std::size_t n = sizes.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(sizes[i]);
        const double y = std::log(times[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

void BenchReport::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "kind,eta,channels,bins,n_pairs,feature_mean_ns,distance_mean_ns,distance_sd_ns,"
           "distance_best_ns,threads,build_flags\n";
    for (const auto& r : rows) {
        out << r.kind << "," << r.eta << "," << r.channels << "," << r.bins << ","
            << r.n_pairs << "," << r.feature_mean_ns << "," << r.distance_mean_ns << ","
            << r.distance_sd_ns << "," << r.distance_best_ns << "," << threads << ","
            << build_flags << "\n";
    }
}

} // namespace texdr

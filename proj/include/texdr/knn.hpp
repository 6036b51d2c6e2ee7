#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace texdr {

/// Exact k-nearest-neighbor graph. Rows are sorted ascending by distance
/// with ties broken by smaller point id; a row never contains its own query.
struct KnnGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::size_t> indices; // n x k
    std::vector<double> distances;    // n x k

    std::size_t neighbor(std::size_t i, std::size_t slot) const { return indices[i * k + slot]; }
    double distance(std::size_t i, std::size_t slot) const { return distances[i * k + slot]; }
};

using PairDistance = std::function<double(std::size_t, std::size_t)>;

/// Brute-force exact knn under an opaque distance callable. Row-parallel;
/// the result is identical at any thread count.
KnnGraph build_knn(std::size_t n, const PairDistance& distance, std::size_t k,
                   std::size_t threads = 0);

/// Debug dump: rows "i, j_1..j_k, d_1..d_k".
void save_knn_graph(const KnnGraph& graph, const std::string& path);

} // namespace texdr

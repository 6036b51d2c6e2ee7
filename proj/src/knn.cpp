#include "texdr/knn.hpp"

#include <algorithm>
#include <fstream>

#include "texdr/errors.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

KnnGraph build_knn(std::size_t n, const PairDistance& distance, std::size_t k,
                   std::size_t threads) {
    if (k < 1 || k >= n) {
        throw ConfigError("build_knn: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
    }
    KnnGraph graph;
    graph.n = n;
    graph.k = k;
    graph.indices.resize(n * k);
    graph.distances.resize(n * k);

    parallel_chunks(n, resolve_thread_count(threads), [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> row;
        row.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            row.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                row.emplace_back(distance(i, j), j);
            }
            std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k),
                              row.end());
            for (std::size_t slot = 0; slot < k; ++slot) {
                graph.distances[i * k + slot] = row[slot].first;
                graph.indices[i * k + slot] = row[slot].second;
            }
        }
    });
    return graph;
}

void save_knn_graph(const KnnGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (std::size_t i = 0; i < graph.n; ++i) {
        out << i;
        for (std::size_t s = 0; s < graph.k; ++s) out << "," << graph.neighbor(i, s);
        for (std::size_t s = 0; s < graph.k; ++s) out << "," << graph.distance(i, s);
        out << "\n";
    }
}

} // namespace texdr

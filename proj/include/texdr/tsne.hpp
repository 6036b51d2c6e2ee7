#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "texdr/knn.hpp"

namespace texdr {

struct TsneParams {
    double perplexity = 20.0;
    std::size_t iterations = 1000;
    double exaggeration_factor = 4.0;
    std::size_t exaggeration_iters = 250;
    std::size_t exaggeration_decay_iters = 40;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    std::size_t momentum_switch_iter = 250;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SigmaCalibration {
    double sigma = 1.0;
    std::vector<double> conditionals; // sum to 1 over the k neighbors
};

/// Binary search for the Gaussian bandwidth whose conditional distribution
/// over the given neighbor distances has the requested perplexity.
SigmaCalibration calibrate_sigma(std::span<const double> distances, double perplexity);

/// Sparse symmetric joint probabilities over the knn graph edges.
/// Each unordered pair is stored once; value(i,j) counts for both directed
/// entries, so the ordered-pair total is 2 * sum of stored values = 1.
struct JointProbabilities {
    struct Entry {
        std::size_t i, j; // i < j
        double p;
    };
    std::size_t n = 0;
    std::vector<Entry> entries;

    double total_ordered() const;
};

JointProbabilities joint_probabilities(const KnnGraph& graph, double perplexity);

struct Embedding {
    std::size_t n = 0;
    std::vector<double> coords; // n x 2

    double x(std::size_t i) const { return coords[2 * i]; }
    double y(std::size_t i) const { return coords[2 * i + 1]; }
};

struct TsneResult {
    Embedding embedding;
    std::vector<double> kl_trace; // KL of the un-exaggerated P, per iteration
};

/// Exact t-SNE (no tree approximation): Student-t low-dimensional kernel,
/// gradient descent with momentum and early exaggeration. Deterministic for
/// a fixed seed and thread count.
TsneResult run_tsne(const JointProbabilities& joint, const TsneParams& params,
                    std::size_t threads = 0);

/// KL divergence of P against the Student-t similarities of the embedding,
/// computed directly from the coordinates.
double kl_cost(const JointProbabilities& joint, const Embedding& embedding);

void save_embedding(const Embedding& embedding, const std::string& path);
Embedding load_embedding(const std::string& path);
void save_kl_trace(std::span<const double> trace, const std::string& path);

} // namespace texdr

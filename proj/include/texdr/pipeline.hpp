#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "texdr/distance.hpp"
#include "texdr/evaluate.hpp"
#include "texdr/image.hpp"
#include "texdr/tsne.hpp"

namespace texdr {

/// End-to-end experiment configuration, parsed from a flat key-value file
/// with [section] headers (see README for the grammar).
struct PipelineConfig {
    // [input]
    bool synthetic = false;
    std::string input_path;
    ImageFormat input_format = ImageFormat::FlatBinary;
    std::string labels_path;
    SyntheticSpec synthetic_spec;

    // [preprocess]
    enum class Preprocess { None, GaussianFilter, Normalize };
    Preprocess preprocess = Preprocess::None;
    double filter_sigma = 5.0;
    int filter_ksize = 3;
    NormalizeMode normalize_mode = NormalizeMode::None;

    // [distance]
    DistanceKind distance;

    // [tsne]
    TsneParams tsne;
    std::size_t knn_k = 0; // 0 means 3 * ceil(perplexity)

    // [evaluation]
    std::size_t k_max = 0; // 0 disables neighbor-hit output

    // [outputs]
    std::string out_embedding;
    std::string out_recolor_ppm;
    std::string out_recolor_png;
    std::string out_neighbor_hit;
    std::string out_kl_trace;

    std::size_t resolved_k() const;
};

PipelineConfig parse_config(const std::string& path);

/// Checks the parsed config without running any compute: referenced input
/// paths must exist, parameters must be internally consistent.
void validate_config(const PipelineConfig& config);

struct PipelineResult {
    Embedding embedding;
    std::optional<NeighborHitCurve> neighbor_hit;
    double final_kl = 0.0;
};

/// Runs generate/load -> preprocess -> knn -> t-SNE -> evaluate -> recolor
/// and writes every requested artifact plus a manifest. On failure, partial
/// outputs of this run are removed.
PipelineResult run_pipeline(const PipelineConfig& config, std::size_t threads = 0);

} // namespace texdr

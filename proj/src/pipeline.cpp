#include "texdr/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "texdr/errors.hpp"
#include "texdr/knn.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

namespace {

constexpr const char* kVersion = "0.1.0";

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

SectionMap read_sections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    SectionMap sections;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        sections[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return sections;
}

class SectionReader {
public:
    SectionReader(const SectionMap& map, std::string section)
        : map_(map), section_(std::move(section)) {}

    std::optional<std::string> get(const std::string& key) const {
        const auto sec = map_.find(section_);
        if (sec == map_.end()) return std::nullopt;
        const auto it = sec->second.find(key);
        if (it == sec->second.end()) return std::nullopt;
        return it->second;
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        return get(key).value_or(fallback);
    }
    double num(const std::string& key, double fallback) const {
        const auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stod(*v);
        } catch (...) {
            throw ConfigError("[" + section_ + "] " + key + ": not a number: " + *v);
        }
    }
    std::size_t count(const std::string& key, std::size_t fallback) const {
        const double v = num(key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v)) {
            throw ConfigError("[" + section_ + "] " + key + ": not a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

private:
    const SectionMap& map_;
    std::string section_;
};

DistanceTag parse_tag(const std::string& name) {
    if (name == "euclidean-sq") return DistanceTag::EuclideanSq;
    if (name == "qf-histogram") return DistanceTag::QfHistogram;
    if (name == "bhattacharyya") return DistanceTag::Bhattacharyya;
    if (name == "chamfer") return DistanceTag::Chamfer;
    if (name == "hausdorff") return DistanceTag::Hausdorff;
    if (name == "hausdorff-median") return DistanceTag::HausdorffMedian;
    if (name == "ssd") return DistanceTag::Ssd;
    throw ConfigError("unknown distance kind: " + name);
}

} // namespace

std::size_t PipelineConfig::resolved_k() const {
    if (knn_k > 0) return knn_k;
    return 3 * static_cast<std::size_t>(std::ceil(tsne.perplexity));
}

PipelineConfig parse_config(const std::string& path) {
    const SectionMap map = read_sections(path);
    PipelineConfig cfg;

    const SectionReader input(map, "input");
    const std::string input_kind = input.str("kind", "synthetic");
    if (input_kind == "synthetic") {
        cfg.synthetic = true;
        cfg.synthetic_spec.side = input.count("side", cfg.synthetic_spec.side);
        cfg.synthetic_spec.noise_sd = input.num("noise_sd", cfg.synthetic_spec.noise_sd);
        cfg.synthetic_spec.block = input.count("block", cfg.synthetic_spec.block);
        cfg.synthetic_spec.seed = input.count("seed", 0);
    } else if (input_kind == "file") {
        cfg.synthetic = false;
        cfg.input_path = input.str("path", "");
        if (cfg.input_path.empty()) throw ConfigError("[input] path required for kind = file");
        const std::string fmt = input.str("format", "flat-binary");
        if (fmt == "flat-binary") cfg.input_format = ImageFormat::FlatBinary;
        else if (fmt == "csv") cfg.input_format = ImageFormat::Csv;
        else throw ConfigError("[input] unknown format: " + fmt);
    } else {
        throw ConfigError("[input] kind must be synthetic or file");
    }
    cfg.labels_path = input.str("labels", "");

    const SectionReader pre(map, "preprocess");
    const std::string mode = pre.str("mode", "none");
    if (mode == "none") {
        cfg.preprocess = PipelineConfig::Preprocess::None;
    } else if (mode == "gaussian-filter") {
        cfg.preprocess = PipelineConfig::Preprocess::GaussianFilter;
        cfg.filter_sigma = pre.num("sigma", cfg.filter_sigma);
        cfg.filter_ksize = static_cast<int>(pre.count("ksize", 3));
    } else if (mode == "normalize") {
        cfg.preprocess = PipelineConfig::Preprocess::Normalize;
        const std::string nm = pre.str("normalize", "min-max");
        if (nm == "min-max") cfg.normalize_mode = NormalizeMode::MinMax;
        else if (nm == "z-score") cfg.normalize_mode = NormalizeMode::ZScore;
        else throw ConfigError("[preprocess] unknown normalize mode: " + nm);
    } else {
        throw ConfigError("[preprocess] unknown mode: " + mode);
    }

    const SectionReader dist(map, "distance");
    cfg.distance.tag = parse_tag(dist.str("kind", "euclidean-sq"));
    cfg.distance.spec.radius = static_cast<int>(dist.count("eta", 1));
    const std::string weighting = dist.str("weighting", "uniform");
    if (weighting == "uniform") cfg.distance.spec.weighting = WeightingScheme::Uniform;
    else if (weighting == "gaussian") cfg.distance.spec.weighting = WeightingScheme::Gaussian;
    else throw ConfigError("[distance] unknown weighting: " + weighting);
    cfg.distance.spec.sigma = dist.num("sigma", 0.0);
    const std::string border = dist.str("border", "clamp");
    if (border == "clamp") cfg.distance.spec.border = BorderPolicy::Clamp;
    else if (border == "mirror") cfg.distance.spec.border = BorderPolicy::Mirror;
    else throw ConfigError("[distance] unknown border policy: " + border);
    cfg.distance.bins = dist.count("bins", 0);
    cfg.distance.ridge = dist.num("ridge", 1e-6);

    const SectionReader tsne(map, "tsne");
    cfg.tsne.perplexity = tsne.num("perplexity", 20.0);
    cfg.tsne.iterations = tsne.count("iterations", 1000);
    cfg.tsne.exaggeration_factor = tsne.num("exaggeration_factor", 4.0);
    cfg.tsne.exaggeration_iters = tsne.count("exaggeration_iters", 250);
    cfg.tsne.exaggeration_decay_iters = tsne.count("exaggeration_decay_iters", 40);
    cfg.tsne.learning_rate = tsne.num("learning_rate", 200.0);
    cfg.tsne.momentum_initial = tsne.num("momentum_initial", 0.5);
    cfg.tsne.momentum_final = tsne.num("momentum_final", 0.8);
    cfg.tsne.momentum_switch_iter = tsne.count("momentum_switch_iter", 250);
    cfg.tsne.seed = tsne.count("seed", 0);
    cfg.knn_k = tsne.count("k", 0);

    const SectionReader eval(map, "evaluation");
    cfg.k_max = eval.count("k_max", 0);

    const SectionReader outputs(map, "outputs");
    cfg.out_embedding = outputs.str("embedding", "");
    cfg.out_recolor_ppm = outputs.str("recolor_ppm", "");
    cfg.out_recolor_png = outputs.str("recolor_png", "");
    cfg.out_neighbor_hit = outputs.str("neighbor_hit", "");
    cfg.out_kl_trace = outputs.str("kl_trace", "");
    return cfg;
}

void validate_config(const PipelineConfig& cfg) {
    if (!cfg.synthetic) {
        if (!std::filesystem::exists(cfg.input_path)) {
            throw ConfigError("input path does not exist: " + cfg.input_path);
        }
    } else {
        cfg.synthetic_spec.validate();
    }
    if (!cfg.labels_path.empty() && !std::filesystem::exists(cfg.labels_path)) {
        throw ConfigError("labels path does not exist: " + cfg.labels_path);
    }
    cfg.tsne.validate();
    if (cfg.distance.texture_aware() && cfg.distance.spec.radius < 0) {
        throw ConfigError("neighborhood radius must be non-negative");
    }
    if (!cfg.out_neighbor_hit.empty() && cfg.labels_path.empty() && !cfg.synthetic) {
        throw ConfigError("neighbor-hit output requires labels");
    }
    if (cfg.preprocess == PipelineConfig::Preprocess::GaussianFilter &&
        (cfg.filter_ksize < 1 || cfg.filter_ksize % 2 == 0)) {
        throw ConfigError("gaussian filter ksize must be odd");
    }
}

namespace {

struct OutputGuard {
    std::vector<std::string> written;
    bool commit = false;

    ~OutputGuard() {
        if (commit) return;
        for (const auto& path : written) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
    }
};

// Rethrows with the failing stage name, preserving the error class so the
// CLI exit code stays meaningful.
[[noreturn]] void stage_fail(const std::string& stage, const std::exception& e) {
    const std::string msg = "pipeline stage '" + stage + "' failed: " + e.what();
    if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
    if (dynamic_cast<const NumericalError*>(&e)) throw NumericalError(msg);
    throw DataError(msg);
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, std::size_t threads) {
    validate_config(cfg);
    const std::size_t nthreads = resolve_thread_count(threads);

    HighDimImage image;
    LabelRaster labels;
    bool have_labels = false;
    try {
        if (cfg.synthetic) {
            SyntheticData data = generate_synthetic(cfg.synthetic_spec);
            image = std::move(data.image);
            labels = std::move(data.labels);
            have_labels = true;
        } else {
            image = load_image(cfg.input_path, cfg.input_format);
        }
        if (!cfg.labels_path.empty()) {
            labels = load_labels(cfg.labels_path);
            have_labels = true;
        }
        if (have_labels && labels.labels.size() != image.pixel_count()) {
            throw DataError("label raster size does not match image");
        }
    } catch (const std::exception& e) {
        stage_fail("input", e);
    }

    try {
        switch (cfg.preprocess) {
            case PipelineConfig::Preprocess::None: break;
            case PipelineConfig::Preprocess::GaussianFilter:
                image = gaussian_filter(image, cfg.filter_sigma, cfg.filter_ksize);
                break;
            case PipelineConfig::Preprocess::Normalize:
                image = normalize_channels(image, cfg.normalize_mode);
                break;
        }
    } catch (const std::exception& e) {
        stage_fail("preprocess", e);
    }

    PipelineResult result;
    JointProbabilities joint;
    TsneResult tsne_result;
    try {
        const DistanceEvaluator evaluate(image, cfg.distance);
        const KnnGraph graph = build_knn(
            image.pixel_count(),
            [&evaluate](std::size_t i, std::size_t j) { return evaluate(i, j); },
            cfg.resolved_k(), nthreads);
        joint = joint_probabilities(graph, cfg.tsne.perplexity);
    } catch (const std::exception& e) {
        stage_fail("knn", e);
    }
    try {
        tsne_result = run_tsne(joint, cfg.tsne, nthreads);
        result.embedding = std::move(tsne_result.embedding);
        result.final_kl = tsne_result.kl_trace.back();
    } catch (const std::exception& e) {
        stage_fail("tsne", e);
    }

    if (have_labels && cfg.k_max > 0) {
        try {
            result.neighbor_hit = neighbor_hit(result.embedding, labels, cfg.k_max);
        } catch (const std::exception& e) {
            stage_fail("evaluate", e);
        }
    }

    OutputGuard guard;
    try {
        if (!cfg.out_embedding.empty()) {
            save_embedding(result.embedding, cfg.out_embedding);
            guard.written.push_back(cfg.out_embedding);

            std::ofstream manifest(cfg.out_embedding + ".manifest");
            manifest << "texdr " << kVersion << "\n"
                     << "seed=" << cfg.tsne.seed << "\n"
                     << "threads=" << nthreads << "\n"
                     << "k=" << cfg.resolved_k() << "\n"
                     << "perplexity=" << cfg.tsne.perplexity << "\n"
                     << "iterations=" << cfg.tsne.iterations << "\n"
                     << "eta=" << cfg.distance.spec.radius << "\n";
            guard.written.push_back(cfg.out_embedding + ".manifest");
        }
        if (!cfg.out_recolor_ppm.empty() || !cfg.out_recolor_png.empty()) {
            const RgbImage rgb =
                recolor(result.embedding, image.width(), image.height(), kDefaultColormap);
            if (!cfg.out_recolor_ppm.empty()) {
                save_ppm(rgb, cfg.out_recolor_ppm);
                guard.written.push_back(cfg.out_recolor_ppm);
            }
            if (!cfg.out_recolor_png.empty()) {
                save_png(rgb, cfg.out_recolor_png);
                guard.written.push_back(cfg.out_recolor_png);
            }
        }
        if (!cfg.out_neighbor_hit.empty() && result.neighbor_hit) {
            save_neighbor_hit(*result.neighbor_hit, cfg.out_neighbor_hit);
            guard.written.push_back(cfg.out_neighbor_hit);
        }
        if (!cfg.out_kl_trace.empty()) {
            save_kl_trace(tsne_result.kl_trace, cfg.out_kl_trace);
            guard.written.push_back(cfg.out_kl_trace);
        }
    } catch (const std::exception& e) {
        stage_fail("outputs", e);
    }
    guard.commit = true;
    return result;
}

} // namespace texdr

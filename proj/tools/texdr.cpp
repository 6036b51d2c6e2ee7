#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "texdr/bench.hpp"
#include "texdr/errors.hpp"
#include "texdr/evaluate.hpp"
#include "texdr/knn.hpp"
#include "texdr/parallel.hpp"
#include "texdr/pipeline.hpp"

namespace {

using namespace texdr;

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string token = csv.substr(pos, comma - pos);
        out.push_back(std::stoi(token));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int run_synth(const std::string& out_path, const std::string& labels_path,
              std::uint64_t seed, std::size_t side, double noise_sd) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.side = side;
    spec.noise_sd = noise_sd;
    const SyntheticData data = generate_synthetic(spec);
    save_image(data.image, out_path, ImageFormat::FlatBinary);
    if (!labels_path.empty()) save_labels(data.labels, labels_path);
    return 0;
}

int run_eval(const std::string& embedding_path, const std::string& labels_path,
             std::size_t k_max, const std::string& out_path) {
    const Embedding embedding = load_embedding(embedding_path);
    const LabelRaster labels = load_labels(labels_path);
    const NeighborHitCurve curve = neighbor_hit(embedding, labels, k_max);
    save_neighbor_hit(curve, out_path);
    std::cout << "mean neighbor hit: " << curve.mean() << "\n";
    return 0;
}

int run_recolor(const std::string& embedding_path, std::size_t width, std::size_t height,
                const std::string& ppm_path, const std::string& png_path) {
    const Embedding embedding = load_embedding(embedding_path);
    const RgbImage rgb = recolor(embedding, width, height, kDefaultColormap);
    if (!ppm_path.empty()) save_ppm(rgb, ppm_path);
    if (!png_path.empty()) save_png(rgb, png_path);
    return 0;
}

int run_bench(const std::string& kind_name, const std::string& eta_csv,
              const std::string& out_path, std::size_t n_pairs, std::size_t reps) {
    // A seeded random image; channel count sized for the kernel under test.
    const std::size_t channels = kind_name == "bhattacharyya" ? 10 : 8;
    HighDimImage image(64, 64, channels);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (auto& v : image.data()) v = value(rng);

    BenchReport report;
    report.threads = 1;
    report.build_flags = "release";
    for (int eta : parse_int_list(eta_csv)) {
        DistanceKind kind;
        if (kind_name == "qf-histogram") kind.tag = DistanceTag::QfHistogram;
        else if (kind_name == "bhattacharyya") kind.tag = DistanceTag::Bhattacharyya;
        else if (kind_name == "chamfer") kind.tag = DistanceTag::Chamfer;
        else if (kind_name == "hausdorff") kind.tag = DistanceTag::Hausdorff;
        else if (kind_name == "hausdorff-median") kind.tag = DistanceTag::HausdorffMedian;
        else if (kind_name == "ssd") kind.tag = DistanceTag::Ssd;
        else if (kind_name == "euclidean-sq") kind.tag = DistanceTag::EuclideanSq;
        else throw ConfigError("unknown kind: " + kind_name);
        kind.spec.radius = eta;
        report.rows.push_back(bench_kernel(kind, image, n_pairs, reps));
    }
    report.save_csv(out_path);
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"texture-aware low-dimensional embeddings of high-dimensional images"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "worker thread count (0 = auto / TEXDR_THREADS)");

    auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark image");
    std::string synth_out, synth_labels;
    std::uint64_t synth_seed = 0;
    std::size_t synth_side = 32;
    double synth_noise = 0.05;
    synth->add_option("--out", synth_out, "output image path (flat-binary)")->required();
    synth->add_option("--labels", synth_labels, "ground-truth label CSV path");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--side", synth_side, "image side length");
    synth->add_option("--noise-sd", synth_noise, "per-channel noise sd");

    auto* run = app.add_subcommand("run", "run a full pipeline from a config file");
    std::string run_config;
    run->add_option("config", run_config, "pipeline config file")->required();

    auto* embed = app.add_subcommand("embed", "alias of run");
    std::string embed_config;
    embed->add_option("config", embed_config, "pipeline config file")->required();

    auto* validate = app.add_subcommand("validate", "dry-run a config file");
    std::string validate_config_path;
    validate->add_option("config", validate_config_path, "pipeline config file")->required();

    auto* eval = app.add_subcommand("eval", "neighbor-hit curve of an embedding");
    std::string eval_embedding, eval_labels, eval_out = "neighbor_hit.csv";
    std::size_t eval_kmax = 63;
    eval->add_option("--embedding", eval_embedding)->required();
    eval->add_option("--labels", eval_labels)->required();
    eval->add_option("--kmax", eval_kmax);
    eval->add_option("--out", eval_out);

    auto* recolor_cmd = app.add_subcommand("recolor", "map an embedding through a 2D colormap");
    std::string rc_embedding, rc_ppm, rc_png;
    std::size_t rc_width = 0, rc_height = 0;
    recolor_cmd->add_option("--embedding", rc_embedding)->required();
    recolor_cmd->add_option("--width", rc_width)->required();
    recolor_cmd->add_option("--height", rc_height)->required();
    recolor_cmd->add_option("--ppm", rc_ppm);
    recolor_cmd->add_option("--png", rc_png);

    auto* bench = app.add_subcommand("bench", "distance kernel timing sweep");
    std::string bench_kind = "chamfer", bench_eta = "1,2,3,4", bench_out = "bench.csv";
    std::size_t bench_pairs = 2000, bench_reps = 5;
    bench->add_option("--kind", bench_kind);
    bench->add_option("--eta", bench_eta, "comma-separated neighborhood radii");
    bench->add_option("--out", bench_out);
    bench->add_option("--pairs", bench_pairs);
    bench->add_option("--reps", bench_reps);

    CLI11_PARSE(app, argc, argv);

    if (*synth) return run_synth(synth_out, synth_labels, synth_seed, synth_side, synth_noise);
    if (*run || *embed) {
        const PipelineConfig cfg = parse_config(*run ? run_config : embed_config);
        run_pipeline(cfg, threads);
        return 0;
    }
    if (*validate) {
        const PipelineConfig cfg = parse_config(validate_config_path);
        texdr::validate_config(cfg);
        std::cout << "config ok\n";
        return 0;
    }
    if (*eval) return run_eval(eval_embedding, eval_labels, eval_kmax, eval_out);
    if (*recolor_cmd) return run_recolor(rc_embedding, rc_width, rc_height, rc_ppm, rc_png);
    if (*bench) return run_bench(bench_kind, bench_eta, bench_out, bench_pairs, bench_reps);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const texdr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const texdr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const texdr::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

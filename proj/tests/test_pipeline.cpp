#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "texdr/errors.hpp"
#include "texdr/pipeline.hpp"

using namespace texdr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("texdr_pipeline_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

} // namespace

TEST_CASE("config parsing: defaults and overrides") {
    TempDir dir;
    const auto path = dir.file("a.cfg", R"(
# comment
[input]
kind = synthetic
side = 16
noise_sd = 0.02
seed = 7

[distance]
kind = chamfer
eta = 2
weighting = gaussian
sigma = 1.5
border = mirror

[tsne]
perplexity = 10
iterations = 300
exaggeration_iters = 75
exaggeration_decay_iters = 30
momentum_switch_iter = 75
seed = 3

[evaluation]
k_max = 20
)");
    const auto cfg = parse_config(path);
    CHECK(cfg.synthetic);
    CHECK(cfg.synthetic_spec.side == 16);
    CHECK(cfg.synthetic_spec.noise_sd == doctest::Approx(0.02));
    CHECK(cfg.synthetic_spec.seed == 7);
    CHECK(cfg.distance.tag == DistanceTag::Chamfer);
    CHECK(cfg.distance.spec.radius == 2);
    CHECK(cfg.distance.spec.weighting == WeightingScheme::Gaussian);
    CHECK(cfg.distance.spec.sigma == doctest::Approx(1.5));
    CHECK(cfg.distance.spec.border == BorderPolicy::Mirror);
    CHECK(cfg.tsne.perplexity == doctest::Approx(10.0));
    CHECK(cfg.tsne.iterations == 300);
    CHECK(cfg.k_max == 20);
    CHECK(cfg.resolved_k() == 30); // 3 * ceil(10)
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config parsing: explicit k beats the perplexity rule") {
    TempDir dir;
    const auto path = dir.file("k.cfg", "[tsne]\nperplexity = 20\nk = 45\n");
    CHECK(parse_config(path).resolved_k() == 45);
}

TEST_CASE("config parsing: malformed inputs raise ConfigError") {
    TempDir dir;
    CHECK_THROWS_AS(parse_config((dir.path / "missing.cfg").string()), ConfigError);
    CHECK_THROWS_AS(parse_config(dir.file("b.cfg", "[input]\nnot a pair\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(dir.file("c.cfg", "[distance]\nkind = mahalanobis\n")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(dir.file("d.cfg", "[tsne]\nperplexity = soup\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(dir.file("e.cfg", "[input]\nkind = telepathy\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(dir.file("f.cfg", "[tsne]\niterations = 2.5\n")), ConfigError);
}

TEST_CASE("validate_config rejects a missing input file before any compute") {
    TempDir dir;
    const auto path = dir.file("g.cfg",
                               "[input]\nkind = file\npath = /nonexistent/image.bin\n");
    const auto cfg = parse_config(path);
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
}

TEST_CASE("validate_config rejects inconsistent parameters") {
    TempDir dir;
    const auto bad_perp = parse_config(dir.file("h.cfg", "[tsne]\nperplexity = 0\n"));
    CHECK_THROWS_AS(validate_config(bad_perp), ConfigError);
    const auto bad_ksize = parse_config(
        dir.file("i.cfg", "[preprocess]\nmode = gaussian-filter\nksize = 4\n"));
    CHECK_THROWS_AS(validate_config(bad_ksize), ConfigError);
    const auto bad_side = parse_config(dir.file("j.cfg", "[input]\nkind = synthetic\nside = 30\n"));
    CHECK_THROWS_AS(validate_config(bad_side), ConfigError);
}

TEST_CASE("every bundled config parses and validates") {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(TEXDR_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        ++seen;
        INFO("config: " << entry.path().string());
        PipelineConfig cfg;
        CHECK_NOTHROW(cfg = parse_config(entry.path().string()));
        CHECK_NOTHROW(validate_config(cfg));
    }
    CHECK(seen >= 10);
}

TEST_CASE("end-to-end run on a small synthetic image writes all artifacts") {
    TempDir dir;
    const std::string embedding = (dir.path / "embed.csv").string();
    const std::string ppm = (dir.path / "out.ppm").string();
    const std::string png = (dir.path / "out.png").string();
    const std::string hits = (dir.path / "hits.csv").string();
    const std::string trace = (dir.path / "kl.csv").string();
    const auto path = dir.file("run.cfg",
                               "[input]\nkind = synthetic\nside = 8\nseed = 1\n"
                               "[distance]\nkind = chamfer\neta = 1\n"
                               "[tsne]\nperplexity = 5\niterations = 120\nexaggeration_iters = 30\n"
                               "exaggeration_decay_iters = 12\nmomentum_switch_iter = 30\nseed = 2\n"
                               "[evaluation]\nk_max = 10\n"
                               "[outputs]\n"
                               "embedding = " + embedding + "\n"
                               "recolor_ppm = " + ppm + "\n"
                               "recolor_png = " + png + "\n"
                               "neighbor_hit = " + hits + "\n"
                               "kl_trace = " + trace + "\n");
    const auto cfg = parse_config(path);
    const auto result = run_pipeline(cfg, 2);
    CHECK(result.embedding.n == 64);
    REQUIRE(result.neighbor_hit.has_value());
    CHECK(result.neighbor_hit->hits.size() == 10);
    CHECK(result.final_kl >= 0.0);
    for (const auto& artifact : {embedding, ppm, png, hits, trace, embedding + ".manifest"}) {
        INFO("artifact: " << artifact);
        CHECK(fs::exists(artifact));
    }
    const auto back = load_embedding(embedding);
    CHECK(back.coords == result.embedding.coords);
}

TEST_CASE("pipeline reruns at a fixed thread count are bit-identical") {
    TempDir dir;
    const auto path = dir.file("rep.cfg",
                               "[input]\nkind = synthetic\nside = 8\nseed = 4\n"
                               "[distance]\nkind = qf-histogram\neta = 1\n"
                               "[tsne]\nperplexity = 4\niterations = 80\nexaggeration_iters = 20\n"
                               "exaggeration_decay_iters = 8\nmomentum_switch_iter = 20\nseed = 5\n");
    const auto cfg = parse_config(path);
    for (std::size_t threads : {1ul, 4ul}) {
        const auto a = run_pipeline(cfg, threads);
        const auto b = run_pipeline(cfg, threads);
        CHECK(a.embedding.coords == b.embedding.coords);
        CHECK(a.final_kl == b.final_kl);
    }
}

TEST_CASE("failed runs leave no partial outputs behind") {
    TempDir dir;
    const std::string embedding = (dir.path / "never.csv").string();
    // The ppm path points into a directory that does not exist, so the
    // outputs stage fails after the embedding file was already written.
    const std::string bad_ppm = (dir.path / "no_such_dir" / "x.ppm").string();
    const auto path = dir.file("fail.cfg",
                               "[input]\nkind = synthetic\nside = 8\nseed = 1\n"
                               "[tsne]\nperplexity = 4\niterations = 30\nexaggeration_iters = 8\n"
                               "exaggeration_decay_iters = 3\nmomentum_switch_iter = 8\n"
                               "[outputs]\nembedding = " + embedding +
                               "\nrecolor_ppm = " + bad_ppm + "\n");
    const auto cfg = parse_config(path);
    CHECK_THROWS_AS(run_pipeline(cfg), DataError);
    CHECK_FALSE(fs::exists(embedding));
    CHECK_FALSE(fs::exists(embedding + ".manifest"));
}

#include "texdr/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "texdr/errors.hpp"
#include "texdr/parallel.hpp"

namespace texdr {

void TsneParams::validate() const {
    if (perplexity < 2.0) throw ConfigError("tsne: perplexity must be at least 2");
    if (iterations < 1) throw ConfigError("tsne: iterations must be positive");
    if (iterations < exaggeration_iters + exaggeration_decay_iters) {
        throw ConfigError("tsne: iterations must cover the exaggeration schedule");
    }
    if (exaggeration_factor <= 0.0) throw ConfigError("tsne: exaggeration factor must be positive");
    if (learning_rate <= 0.0) throw ConfigError("tsne: learning rate must be positive");
    if (momentum_initial < 0.0 || momentum_initial >= 1.0 || momentum_final < 0.0 ||
        momentum_final >= 1.0) {
        throw ConfigError("tsne: momentum must lie in [0, 1)");
    }
}

SigmaCalibration calibrate_sigma(std::span<const double> distances, double perplexity) {
    const std::size_t k = distances.size();
    if (k < 2) throw ConfigError("calibrate_sigma: need at least 2 neighbor distances");
    if (perplexity >= static_cast<double>(k)) {
        throw ConfigError("calibrate_sigma: perplexity " + std::to_string(perplexity) +
                          " unreachable with k=" + std::to_string(k) + " neighbors");
    }

    SigmaCalibration result;
    result.conditionals.resize(k);

    const double d_min = *std::min_element(distances.begin(), distances.end());
    const double d_max = *std::max_element(distances.begin(), distances.end());
    if (d_max == d_min) {
        // Degenerate row: any bandwidth yields the uniform distribution.
        std::fill(result.conditionals.begin(), result.conditionals.end(),
                  1.0 / static_cast<double>(k));
        result.sigma = 1.0;
        return result;
    }

    // Search on the precision beta = 1 / (2 sigma^2). Entropy decreases
    // monotonically in beta.
    const double target = std::log2(perplexity);
    double beta = 1.0;
    double beta_lo = 0.0;
    double beta_hi = std::numeric_limits<double>::infinity();

    auto entropy_at = [&](double b) {
        double sum = 0.0;
        for (std::size_t s = 0; s < k; ++s) {
            result.conditionals[s] = std::exp(-(distances[s] - d_min) * b);
            sum += result.conditionals[s];
        }
        double h = 0.0;
        for (std::size_t s = 0; s < k; ++s) {
            result.conditionals[s] /= sum;
            if (result.conditionals[s] > 0.0)
                h -= result.conditionals[s] * std::log2(result.conditionals[s]);
        }
        return h;
    };

    for (int step = 0; step < 200; ++step) {
        const double h = entropy_at(beta);
        if (std::abs(std::exp2(h) - perplexity) < 1e-4) break;
        if (h > target) {
            beta_lo = beta;
            beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta_lo + beta_hi);
        } else {
            beta_hi = beta;
            beta = beta_lo == 0.0 ? beta / 2.0 : 0.5 * (beta_lo + beta_hi);
        }
    }
    entropy_at(beta);
    result.sigma = 1.0 / std::sqrt(2.0 * beta);
    return result;
}

double JointProbabilities::total_ordered() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.p;
    return 2.0 * sum;
}

JointProbabilities joint_probabilities(const KnnGraph& graph, double perplexity) {
    JointProbabilities joint;
    joint.n = graph.n;

    std::map<std::pair<std::size_t, std::size_t>, double> accum;
    const double norm = 1.0 / (2.0 * static_cast<double>(graph.n));
    for (std::size_t i = 0; i < graph.n; ++i) {
        const SigmaCalibration cal = calibrate_sigma(
            std::span<const double>(graph.distances.data() + i * graph.k, graph.k), perplexity);
        for (std::size_t s = 0; s < graph.k; ++s) {
            const std::size_t j = graph.neighbor(i, s);
            const auto key = std::minmax(i, j);
            accum[{key.first, key.second}] += cal.conditionals[s] * norm;
        }
    }
    joint.entries.reserve(accum.size());
    for (const auto& [key, p] : accum) joint.entries.push_back({key.first, key.second, p});
    return joint;
}

namespace {

struct Adjacency {
    std::vector<std::size_t> offsets; // n + 1
    std::vector<std::size_t> targets;
    std::vector<double> probs;
};

Adjacency build_adjacency(const JointProbabilities& joint) {
    Adjacency adj;
    const std::size_t n = joint.n;
    std::vector<std::size_t> degree(n, 0);
    for (const auto& e : joint.entries) {
        ++degree[e.i];
        ++degree[e.j];
    }
    adj.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + degree[i];
    adj.targets.resize(adj.offsets[n]);
    adj.probs.resize(adj.offsets[n]);
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& e : joint.entries) {
        adj.targets[cursor[e.i]] = e.j;
        adj.probs[cursor[e.i]++] = e.p;
        adj.targets[cursor[e.j]] = e.i;
        adj.probs[cursor[e.j]++] = e.p;
    }
    return adj;
}

// Sum of Student-t similarities over ordered pairs; chunk partials are
// combined in index order for reproducibility at a fixed thread count.
double student_t_normalizer(std::span<const double> coords, std::size_t n,
                            std::size_t threads) {
    const std::size_t chunk = std::max<std::size_t>(1, (n + threads - 1) / threads);
    std::vector<double> partial((n + chunk - 1) / chunk, 0.0);
    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double xi = coords[2 * i], yi = coords[2 * i + 1];
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = xi - coords[2 * j];
                const double dy = yi - coords[2 * j + 1];
                acc += 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
        partial[begin / chunk] = acc;
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return 2.0 * total;
}

} // namespace

TsneResult run_tsne(const JointProbabilities& joint, const TsneParams& params,
                    std::size_t threads) {
    params.validate();
    const std::size_t n = joint.n;
    if (n < 2) throw ConfigError("run_tsne: need at least 2 points");
    const std::size_t nthreads = resolve_thread_count(threads);

    TsneResult result;
    result.embedding.n = n;
    auto& coords = result.embedding.coords;
    coords.resize(2 * n);
    {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> init(0.0, 1e-4);
        for (auto& v : coords) v = init(rng);
    }

    const Adjacency adj = build_adjacency(joint);
    std::vector<double> velocity(2 * n, 0.0);
    std::vector<double> gradient(2 * n, 0.0);
    result.kl_trace.reserve(params.iterations);

    // KL of the real (un-exaggerated) P against the current embedding,
    // reusing a normalizer computed from the same coordinates.
    auto kl_at = [&](double z) {
        double cost = 0.0;
        for (const auto& e : joint.entries) {
            const double dx = coords[2 * e.i] - coords[2 * e.j];
            const double dy = coords[2 * e.i + 1] - coords[2 * e.j + 1];
            const double q = (1.0 / (1.0 + dx * dx + dy * dy)) / z;
            cost += 2.0 * e.p * std::log(e.p / q);
        }
        return cost;
    };

    for (std::size_t iter = 0; iter < params.iterations; ++iter) {
        double alpha = 1.0;
        if (iter < params.exaggeration_iters) {
            alpha = params.exaggeration_factor;
        } else if (iter < params.exaggeration_iters + params.exaggeration_decay_iters) {
            const double frac =
                static_cast<double>(iter - params.exaggeration_iters) /
                static_cast<double>(params.exaggeration_decay_iters);
            alpha = std::pow(params.exaggeration_factor, 1.0 - frac);
        }

        const double z = student_t_normalizer(coords, n, nthreads);
        if (iter > 0) result.kl_trace.push_back(kl_at(z));

        parallel_chunks(n, nthreads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double xi = coords[2 * i], yi = coords[2 * i + 1];
                double ax = 0.0, ay = 0.0;
                for (std::size_t s = adj.offsets[i]; s < adj.offsets[i + 1]; ++s) {
                    const std::size_t j = adj.targets[s];
                    const double dx = xi - coords[2 * j];
                    const double dy = yi - coords[2 * j + 1];
                    const double q_tilde = 1.0 / (1.0 + dx * dx + dy * dy);
                    const double f = alpha * adj.probs[s] * q_tilde;
                    ax += f * dx;
                    ay += f * dy;
                }
                double rx = 0.0, ry = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const double dx = xi - coords[2 * j];
                    const double dy = yi - coords[2 * j + 1];
                    const double q_tilde = 1.0 / (1.0 + dx * dx + dy * dy);
                    const double f = q_tilde * q_tilde;
                    rx += f * dx;
                    ry += f * dy;
                }
                gradient[2 * i] = 4.0 * (ax - rx / z);
                gradient[2 * i + 1] = 4.0 * (ay - ry / z);
            }
        });

        const double momentum = iter < params.momentum_switch_iter ? params.momentum_initial
                                                                   : params.momentum_final;
        for (std::size_t s = 0; s < 2 * n; ++s) {
            if (!std::isfinite(gradient[s])) {
                throw NumericalError("run_tsne: non-finite gradient at iteration " +
                                     std::to_string(iter));
            }
            velocity[s] = momentum * velocity[s] - params.learning_rate * gradient[s];
            coords[s] += velocity[s];
        }
    }
    result.kl_trace.push_back(kl_at(student_t_normalizer(coords, n, nthreads)));
    return result;
}

double kl_cost(const JointProbabilities& joint, const Embedding& embedding) {
    const std::size_t n = embedding.n;
    if (joint.n != n) throw DataError("kl_cost: size mismatch");
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = embedding.x(i) - embedding.x(j);
            const double dy = embedding.y(i) - embedding.y(j);
            z += 1.0 / (1.0 + dx * dx + dy * dy);
        }
    }
    z *= 2.0;
    double cost = 0.0;
    for (const auto& e : joint.entries) {
        if (e.p <= 0.0) continue;
        const double dx = embedding.x(e.i) - embedding.x(e.j);
        const double dy = embedding.y(e.i) - embedding.y(e.j);
        const double q = (1.0 / (1.0 + dx * dx + dy * dy)) / z;
        cost += 2.0 * e.p * std::log(e.p / q);
    }
    return cost;
}

void save_embedding(const Embedding& embedding, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (std::size_t i = 0; i < embedding.n; ++i) {
        out << embedding.x(i) << "," << embedding.y(i) << "\n";
    }
}

Embedding load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    Embedding e;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream rs(line);
        double x, y;
        if (!(rs >> x >> y)) throw DataError(path + ": malformed embedding row");
        e.coords.push_back(x);
        e.coords.push_back(y);
        ++e.n;
    }
    if (e.n == 0) throw DataError(path + ": empty embedding");
    return e;
}

void save_kl_trace(std::span<const double> trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "iter,kl\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out << i << "," << trace[i] << "\n";
}

} // namespace texdr

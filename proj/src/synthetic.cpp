#include "hyptsne/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hyptsne {

namespace {

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dims, double scale) {
    std::normal_distribution<double> normal(0, 1);
    std::vector<double> out(dims);
    for (auto& v : out) {
        v = scale * normal(rng);
    }
    return out;
}

}

Dataset gaussian_mixture(const MixtureOptions& options) {
    if (options.n < 2 || options.classes == 0 || options.dims == 0) {
        throw std::invalid_argument("gaussian_mixture: need n >= 2, at least one class and one dimension");
    }
    std::mt19937_64 rng(options.seed);
    std::vector<std::vector<double>> centers;
    for (std::size_t c = 0; c < options.classes; ++c) {
        auto dir = gaussian_vector(rng, options.dims, 1);
        double len = 0;
        for (double v : dir) {
            len += v * v;
        }
        len = std::sqrt(len);
        for (auto& v : dir) {
            v *= options.separation / len;
        }
        centers.push_back(std::move(dir));
    }

    std::normal_distribution<double> normal(0, 1);
    DataMatrix data(options.n, options.dims);
    std::vector<std::int64_t> labels(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        const std::size_t c = i % options.classes;
        labels[i] = static_cast<std::int64_t>(c);
        for (std::size_t k = 0; k < options.dims; ++k) {
            data(i, k) = centers[c][k] + normal(rng);
        }
    }
    return {std::move(data), std::move(labels)};
}

Dataset hierarchical_clusters(const HierarchyOptions& options) {
    if (options.n < 2 || options.depth == 0 || options.branching < 2 || options.dims == 0) {
        throw std::invalid_argument("hierarchical_clusters: need n >= 2, depth >= 1, branching >= 2 and dims >= 1");
    }
    std::mt19937_64 rng(options.seed);

    // Level by level, children inherit the parent center plus a shrinking offset.
    std::vector<std::vector<double>> level{std::vector<double>(options.dims, 0.0)};
    double scale = options.spread;
    for (std::size_t l = 0; l < options.depth; ++l) {
        std::vector<std::vector<double>> next;
        for (const auto& parent : level) {
            for (std::size_t b = 0; b < options.branching; ++b) {
                auto child = gaussian_vector(rng, options.dims, scale);
                for (std::size_t k = 0; k < options.dims; ++k) {
                    child[k] += parent[k];
                }
                next.push_back(std::move(child));
            }
        }
        level = std::move(next);
        scale *= options.decay;
    }

    const std::size_t leaves = level.size();
    const std::size_t per_branch = leaves / options.branching;
    std::normal_distribution<double> normal(0, options.noise);
    DataMatrix data(options.n, options.dims);
    std::vector<std::int64_t> labels(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        const std::size_t leaf = i % leaves;
        labels[i] = static_cast<std::int64_t>(leaf / per_branch);
        for (std::size_t k = 0; k < options.dims; ++k) {
            data(i, k) = level[leaf][k] + normal(rng);
        }
    }
    return {std::move(data), std::move(labels)};
}

}

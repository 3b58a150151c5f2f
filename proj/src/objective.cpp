#include "hyptsne/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hyptsne/parallel.hpp"

namespace hyptsne {

namespace {

void check_embedding(const SparseAffinities* P, std::span<const PoincarePoint> embedding) {
    if (embedding.size() < 2) {
        throw std::invalid_argument("objective: need at least two embedding points");
    }
    if (P != nullptr && P->size() != embedding.size()) {
        throw std::invalid_argument("objective: affinities cover " + std::to_string(P->size())
                                    + " points but the embedding has " + std::to_string(embedding.size()));
    }
}

std::vector<double> alphas(std::span<const PoincarePoint> embedding) {
    std::vector<double> out(embedding.size());
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        out[i] = 1 - norm2(embedding[i].vec());
    }
    return out;
}

// Student-t kernel on the hyperbolic distance and, for distinct points,
// d * grad_yi d = grad_yi (d^2 / 2), sharing the square root.
struct PairTerm {
    double kernel;
    Vec2 gradient;
    bool coincident;
};

inline PairTerm pair_term(Vec2 yi, Vec2 yj, double alpha_i, double alpha_j) {
    const Vec2 diff = yi - yj;
    const double dd = norm2(diff);
    if (dd == 0) {
        return {1, {}, true};
    }
    const double x = 2 * dd / (alpha_i * alpha_j);
    const double root = std::sqrt(x * (x + 2));
    const double dist = std::log1p(x + root);
    const double kernel = 1 / (1 + dist * dist);
    const double scale = 4 * dist / (alpha_i * alpha_j * root);
    return {kernel, scale * (diff + (dd / alpha_i) * yi), false};
}

inline double pair_kernel(Vec2 yi, Vec2 yj, double alpha_i, double alpha_j) {
    const double dist = internal::acosh1p(internal::distance_argument(yi, yj, alpha_i, alpha_j));
    return 1 / (1 + dist * dist);
}

Vec2 attraction(const SparseAffinities& P, std::span<const PoincarePoint> embedding, std::span<const double> alpha,
                std::size_t i) {
    Vec2 out;
    const Vec2 yi = embedding[i].vec();
    auto cols = P.columns(i);
    auto vals = P.values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
        const std::size_t j = cols[e];
        const PairTerm term = pair_term(yi, embedding[j].vec(), alpha[i], alpha[j]);
        if (!term.coincident) {
            out += (vals[e] * term.kernel) * term.gradient;
        }
    }
    return out;
}

// Lexicographic (x, y) order of the points, ties by index. Both gradient paths
// reduce repulsion in this order, which makes theta = 0 reproduce the exact
// path bit for bit.
bool coordinate_less(PoincarePoint a, PoincarePoint b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

std::vector<std::size_t> canonical_order(std::span<const PoincarePoint> embedding) {
    std::vector<std::size_t> order(embedding.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return coordinate_less(embedding[a], embedding[b]);
    });
    return order;
}

struct Repulsion {
    Vec2 force;
    double z = 0;

    void add(const PairTerm& term, double count) {
        z += count * term.kernel;
        if (!term.coincident) {
            force += (count * term.kernel * term.kernel) * term.gradient;
        }
    }
};

double ordered_sum(std::span<const double> values) {
    double out = 0;
    for (double v : values) {
        out += v;
    }
    return out;
}

}

double normalization_exact(std::span<const PoincarePoint> embedding, int threads) {
    check_embedding(nullptr, embedding);
    const std::size_t n = embedding.size();
    const auto alpha = alphas(embedding);
    std::vector<double> partial(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vec2 yi = embedding[i].vec();
            double z = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    z += pair_kernel(yi, embedding[j].vec(), alpha[i], alpha[j]);
                }
            }
            partial[i] = z;
        }
    });
    return ordered_sum(partial);
}

DenseSimilarities q_matrix_exact(std::span<const PoincarePoint> embedding, int threads) {
    check_embedding(nullptr, embedding);
    const std::size_t n = embedding.size();
    const auto alpha = alphas(embedding);
    DenseSimilarities out;
    out.n = n;
    out.q.assign(n * n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vec2 yi = embedding[i].vec();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    out.q[i * n + j] = pair_kernel(yi, embedding[j].vec(), alpha[i], alpha[j]);
                }
            }
        }
    });
    out.z = ordered_sum(out.q);
    for (auto& v : out.q) {
        v /= out.z;
    }
    return out;
}

double kl_cost(const SparseAffinities& P, std::span<const PoincarePoint> embedding, int threads) {
    check_embedding(&P, embedding);
    const double z = normalization_exact(embedding, threads);
    const auto alpha = alphas(embedding);
    double cost = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        auto cols = P.columns(i);
        auto vals = P.values(i);
        const Vec2 yi = embedding[i].vec();
        for (std::size_t e = 0; e < cols.size(); ++e) {
            const double p = vals[e];
            if (p <= 0) {
                continue;
            }
            const double q = std::max(pair_kernel(yi, embedding[cols[e]].vec(), alpha[i], alpha[cols[e]]) / z, similarity_floor);
            cost += p * std::log(std::max(p, similarity_floor) / q);
        }
    }
    return cost;
}

GradientResult gradient_exact(const SparseAffinities& P, std::span<const PoincarePoint> embedding,
                              double attraction_scale, int threads) {
    check_embedding(&P, embedding);
    const std::size_t n = embedding.size();
    const auto alpha = alphas(embedding);

    const auto order = canonical_order(embedding);

    std::vector<Vec2> attractive(n);
    std::vector<Vec2> repulsive(n);
    std::vector<double> partial_z(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            attractive[i] = attraction(P, embedding, alpha, i);
            const Vec2 yi = embedding[i].vec();
            Repulsion acc;
            for (std::size_t j : order) {
                if (j != i) {
                    acc.add(pair_term(yi, embedding[j].vec(), alpha[i], alpha[j]), 1);
                }
            }
            repulsive[i] = acc.force;
            partial_z[i] = acc.z;
        }
    });

    GradientResult out;
    out.z = ordered_sum(partial_z);
    out.field.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.field[i] = TangentVector::from(4 * (attraction_scale * attractive[i] - (1 / out.z) * repulsive[i]));
    }
    return out;
}

GradientResult gradient_accelerated(const SparseAffinities& P, std::span<const PoincarePoint> embedding,
                                    const PolarQuadtree& tree, double theta, double attraction_scale, int threads) {
    check_embedding(&P, embedding);
    if (tree.size() != embedding.size()) {
        throw std::invalid_argument("gradient_accelerated: tree holds " + std::to_string(tree.size())
                                    + " points but the embedding has " + std::to_string(embedding.size()));
    }
    if (!(theta >= 0)) {
        throw std::invalid_argument("gradient_accelerated: theta must be non-negative");
    }
    const std::size_t n = embedding.size();
    const auto alpha = alphas(embedding);

    std::vector<Vec2> attractive(n);
    std::vector<Vec2> repulsive(n);
    std::vector<double> partial_z(n);
    std::vector<TraversalStats> stats(n);
    const std::vector<double> thresholds = tree.criterion(theta);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<FarFieldVisit> leaves;
        for (std::size_t i = begin; i < end; ++i) {
            attractive[i] = attraction(P, embedding, alpha, i);
            const Vec2 yi = embedding[i].vec();
            Repulsion acc;
            if (theta > 0) {
                stats[i] = tree.traverse(embedding[i], std::span<const double>(thresholds), [&](const FarFieldVisit& visit) {
                    const Vec2 yj = visit.point.vec();
                    acc.add(pair_term(yi, yj, alpha[i], 1 - norm2(yj)), visit.count);
                });
            } else {
                // Only leaves are visited; replay them one point at a time in canonical order.
                leaves.clear();
                stats[i] = tree.traverse(embedding[i], std::span<const double>(thresholds), [&](const FarFieldVisit& visit) { leaves.push_back(visit); });
                std::sort(leaves.begin(), leaves.end(), [](const FarFieldVisit& a, const FarFieldVisit& b) {
                    return coordinate_less(a.point, b.point);
                });
                for (const auto& visit : leaves) {
                    const Vec2 yj = visit.point.vec();
                    const PairTerm term = pair_term(yi, yj, alpha[i], 1 - norm2(yj));
                    for (std::uint32_t c = 0; c < visit.count; ++c) {
                        acc.add(term, 1);
                    }
                }
            }
            repulsive[i] = acc.force;
            partial_z[i] = acc.z;
        }
    });

    GradientResult out;
    out.z = ordered_sum(partial_z);
    out.field.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.field[i] = TangentVector::from(4 * (attraction_scale * attractive[i] - (1 / out.z) * repulsive[i]));
        out.stats += stats[i];
    }
    return out;
}

}

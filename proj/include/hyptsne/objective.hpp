#ifndef HYPTSNE_OBJECTIVE_HPP
#define HYPTSNE_OBJECTIVE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "affinity.hpp"
#include "geometry.hpp"
#include "quadtree.hpp"

/**
 * @file objective.hpp
 *
 * @brief KL divergence between the input affinities and Student-t similarities
 * on hyperbolic distances, with exact and tree-accelerated gradients.
 *
 * Gradients are the Euclidean variation dC/dy_i. The optimizer applies the
 * inverse conformal factor.
 *
 * Repulsive sums are reduced over points in lexicographic (x, y) order, so a
 * theta = 0 traversal gives the same bits as the exact gradient.
 */

namespace hyptsne {

using GradientField = std::vector<TangentVector>;

/** Dense low-dimensional similarities, for small instances and cost reporting. */
struct DenseSimilarities {
    std::size_t n = 0;
    /** Row-major q_ij with a zero diagonal. */
    std::vector<double> q;
    /** Sum over k != l of (1 + d_kl^2)^-1. */
    double z = 0;

    double operator()(std::size_t i, std::size_t j) const { return q[i * n + j]; }
};

DenseSimilarities q_matrix_exact(std::span<const PoincarePoint> embedding, int threads = 1);

/** Exact normalizer Z over all ordered pairs. */
double normalization_exact(std::span<const PoincarePoint> embedding, int threads = 1);

inline constexpr double similarity_floor = 1e-12;

/**
 * Sum over stored entries of p_ij log(p_ij / q_ij), with q floored at
 * `similarity_floor`. Uses the exact normalizer, so it is O(n^2).
 */
double kl_cost(const SparseAffinities& P, std::span<const PoincarePoint> embedding, int threads = 1);

struct GradientResult {
    GradientField field;
    /** Normalizer used for the repulsive term (exact or estimated). */
    double z = 0;
    TraversalStats stats;
};

/**
 * O(n^2) gradient in split form,
 * 4 sum_j (s p_ij w_ij - w_ij^2 / Z) d_ij grad_yi d_ij with w = (1 + d^2)^-1,
 * which is the derivative of `kl_cost()`. `attraction_scale` s multiplies
 * every p_ij (early exaggeration). Coincident pairs add to Z but not to the
 * forces.
 */
GradientResult gradient_exact(const SparseAffinities& P, std::span<const PoincarePoint> embedding,
                              double attraction_scale = 1, int threads = 1);

/**
 * Gradient with the repulsive sum taken from far-field traversals of `tree`,
 * which must have been built on `embedding`. Z is estimated from the same
 * traversals and summed over all query points.
 */
GradientResult gradient_accelerated(const SparseAffinities& P, std::span<const PoincarePoint> embedding,
                                    const PolarQuadtree& tree, double theta, double attraction_scale = 1,
                                    int threads = 1);

}

#endif

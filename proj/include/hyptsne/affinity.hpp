#ifndef HYPTSNE_AFFINITY_HPP
#define HYPTSNE_AFFINITY_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "data_matrix.hpp"

/**
 * @file affinity.hpp
 *
 * @brief High-dimensional input similarities: PCA, exact kNN, perplexity
 * calibration and symmetrization into a sparse joint distribution.
 */

namespace hyptsne {

struct PcaResult {
    /** Centered data projected onto the leading axes; n x target_dims. */
    DataMatrix data;
    /** Variance along each returned axis, descending. */
    std::vector<double> variances;
    /** Number of axes with non-negligible variance. */
    std::size_t rank = 0;
    /** Set when rank < target_dims; trailing columns are zero. */
    bool rank_deficient = false;
};

/**
 * Project centered `data` onto its top `target_dims` principal axes.
 *
 * Each axis is oriented so that its largest-magnitude loading is positive,
 * which makes the output independent of the eigensolver's sign choices.
 * Throws `std::invalid_argument` if `target_dims > min(n, d)` or is zero.
 */
PcaResult pca_reduce(const DataMatrix& data, std::size_t target_dims);

/** Per-point neighbor indices and squared Euclidean distances, ascending. */
struct NeighborLists {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::size_t> indices;
    std::vector<double> sq_distances;

    std::span<const std::size_t> neighbors_of(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> distances_of(std::size_t i) const { return {sq_distances.data() + i * k, k}; }
};

/** Above this many points `knn()` switches from brute force to the VP-tree. */
inline constexpr std::size_t vptree_threshold = 5000;

/**
 * Exact k nearest neighbors (self excluded), ordered by (distance, index).
 * Throws `std::invalid_argument` unless 0 < k < n.
 */
NeighborLists knn(const DataMatrix& data, std::size_t k, int threads = 1);
NeighborLists knn_brute_force(const DataMatrix& data, std::size_t k, int threads = 1);
NeighborLists knn_vptree(const DataMatrix& data, std::size_t k, int threads = 1);

struct BandwidthResult {
    /** Gaussian bandwidth per point. Infinite if all neighbors are equidistant. */
    std::vector<double> sigma;
    /** Conditional p_{j|i}, laid out like `NeighborLists::indices`. */
    std::vector<double> conditional;
    /** 2^H(P_i) actually reached. */
    std::vector<double> achieved_perplexity;
    /** Points whose search did not reach the tolerance. */
    std::size_t unconverged = 0;
};

inline constexpr double perplexity_tolerance = 1e-5;
inline constexpr int max_bandwidth_steps = 200;

/**
 * Bisection over log(beta), beta = 1 / (2 sigma^2), until the perplexity of
 * each truncated conditional distribution matches `perplexity`.
 * Throws `std::invalid_argument` unless 1 <= perplexity < k.
 */
BandwidthResult calibrate_bandwidths(const NeighborLists& neighbors, double perplexity, int threads = 1);

/**
 * Sparse symmetric joint probabilities, stored as CSR with sorted columns.
 * Diagonal entries are never stored.
 */
class SparseAffinities {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseAffinities() = default;

    /** Duplicate (row, col) entries are summed. Throws on diagonal or out-of-range entries. */
    static SparseAffinities from_entries(std::size_t n, std::vector<Entry> entries);

    std::size_t size() const { return n_; }
    std::size_t nonzeros() const { return cols_.size(); }

    std::span<const std::size_t> columns(std::size_t i) const {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> values(std::size_t i) const {
        return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /** p_ij, or 0 if not stored. */
    double value(std::size_t i, std::size_t j) const;

    double total() const;

    bool is_symmetric() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
};

/**
 * p_ij = (p_{j|i} + p_{i|j}) / (2n) on the union of the neighbor graphs,
 * then rescaled so that the entries sum to one.
 */
SparseAffinities symmetrize_normalize(const NeighborLists& neighbors, std::span<const double> conditional);

/** Neighbor count used for a given perplexity: floor(3 * perplexity). */
std::size_t neighbor_count(double perplexity);

struct AffinityOptions {
    double perplexity = 30;
    std::size_t pca_dims = 50;
    int threads = 1;
};

struct AffinityResult {
    /** The PCA representation used for the neighbor search. */
    DataMatrix reduced;
    SparseAffinities P;
    std::size_t unconverged = 0;
    bool pca_rank_deficient = false;
};

/**
 * Full input pipeline: PCA to min(pca_dims, n, d) dimensions, kNN with
 * k = min(floor(3 perplexity), n - 1), bandwidth calibration, symmetrization.
 */
AffinityResult build_affinities(const DataMatrix& data, const AffinityOptions& options);

}

#endif

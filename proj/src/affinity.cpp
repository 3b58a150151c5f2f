#include "hyptsne/affinity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "hyptsne/parallel.hpp"

namespace hyptsne {

PcaResult pca_reduce(const DataMatrix& data, std::size_t target_dims) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (target_dims == 0 || target_dims > std::min(n, d)) {
        throw std::invalid_argument("pca_reduce: target_dims must be in [1, min(n, d)] = [1, "
                                    + std::to_string(std::min(n, d)) + "], got " + std::to_string(target_dims));
    }

    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMatrix> raw(data.values().data(), n, d);
    const Eigen::RowVectorXd mean = raw.colwise().mean();
    const Eigen::MatrixXd centered = raw.rowwise() - mean;
    const Eigen::MatrixXd covariance = (centered.transpose() * centered) / static_cast<double>(std::max<std::size_t>(n - 1, 1));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("pca_reduce: eigendecomposition failed");
    }
    const Eigen::VectorXd& evals = solver.eigenvalues();
    const Eigen::MatrixXd& evecs = solver.eigenvectors();

    // Eigen sorts ascending; walk from the back.
    const double largest = std::max(evals(d - 1), 0.0);
    const double cutoff = largest * 1e-12 * static_cast<double>(d);

    Eigen::MatrixXd axes(d, target_dims);
    PcaResult out;
    out.variances.resize(target_dims, 0);
    for (std::size_t c = 0; c < target_dims; ++c) {
        const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - c);
        const double variance = evals(src);
        if (variance > cutoff && largest > 0) {
            Eigen::VectorXd axis = evecs.col(src);
            Eigen::Index pivot = 0;
            axis.cwiseAbs().maxCoeff(&pivot);
            if (axis(pivot) < 0) {
                axis = -axis;
            }
            axes.col(c) = axis;
            out.variances[c] = variance;
            ++out.rank;
        } else {
            axes.col(c).setZero();
        }
    }
    out.rank_deficient = out.rank < target_dims;

    const Eigen::MatrixXd projected = centered * axes;
    out.data = DataMatrix(n, target_dims);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < target_dims; ++c) {
            out.data(i, c) = projected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

namespace {

void check_k(const DataMatrix& data, std::size_t k) {
    if (k == 0 || k >= data.rows()) {
        throw std::invalid_argument("knn: need 0 < k < n, got k = " + std::to_string(k) + ", n = "
                                    + std::to_string(data.rows()));
    }
}

using Candidate = std::pair<double, std::size_t>;

// Max-heap of the k best (distance, index) pairs seen so far.
class BestK {
public:
    explicit BestK(std::size_t k) : k_(k) {}

    void offer(double dist, std::size_t index) {
        if (heap_.size() < k_) {
            heap_.emplace(dist, index);
        } else if (Candidate(dist, index) < heap_.top()) {
            heap_.pop();
            heap_.emplace(dist, index);
        }
    }

    double bound() const {
        return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.top().first;
    }

    void drain_into(std::size_t* indices, double* distances) {
        for (std::size_t pos = heap_.size(); pos > 0; --pos) {
            indices[pos - 1] = heap_.top().second;
            distances[pos - 1] = heap_.top().first;
            heap_.pop();
        }
    }

private:
    std::size_t k_;
    std::priority_queue<Candidate> heap_;
};

class VantagePointTree {
public:
    explicit VantagePointTree(const DataMatrix& data) : data_(data), order_(data.rows()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(data.rows());
        root_ = build(0, order_.size());
    }

    void search(std::size_t query, BestK& best) const {
        search(root_, query, best);
    }

private:
    struct Node {
        std::size_t point = 0;
        double radius = 0; // Euclidean, not squared
        int inside = -1;
        int outside = -1;
    };

    int build(std::size_t lower, std::size_t upper) {
        if (lower == upper) {
            return -1;
        }
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        // Deterministic vantage choice: the first point of the range.
        const std::size_t vp = order_[lower];
        nodes_[id].point = vp;
        if (upper - lower > 1) {
            const std::size_t median = lower + 1 + (upper - lower - 1) / 2;
            auto vrow = data_.row(vp);
            std::nth_element(order_.begin() + lower + 1, order_.begin() + median, order_.begin() + upper,
                             [&](std::size_t a, std::size_t b) {
                                 return squared_euclidean(vrow, data_.row(a)) < squared_euclidean(vrow, data_.row(b));
                             });
            nodes_[id].radius = std::sqrt(squared_euclidean(vrow, data_.row(order_[median])));
            const int inside = build(lower + 1, median);
            const int outside = build(median, upper);
            nodes_[id].inside = inside;
            nodes_[id].outside = outside;
        }
        return id;
    }

    void search(int id, std::size_t query, BestK& best) const {
        if (id < 0) {
            return;
        }
        const Node& node = nodes_[id];
        const double sq = squared_euclidean(data_.row(query), data_.row(node.point));
        if (node.point != query) {
            best.offer(sq, node.point);
        }
        if (node.inside < 0 && node.outside < 0) {
            return;
        }

        // Inclusive pruning with a little slack so that ties on the bound survive round-off.
        const double dist = std::sqrt(sq);
        auto reach = [&]() { return std::sqrt(best.bound()) * (1 + 1e-12) + 1e-300; };
        if (dist < node.radius) {
            if (dist - node.radius <= reach()) {
                search(node.inside, query, best);
            }
            if (node.radius - dist <= reach()) {
                search(node.outside, query, best);
            }
        } else {
            if (node.radius - dist <= reach()) {
                search(node.outside, query, best);
            }
            if (dist - node.radius <= reach()) {
                search(node.inside, query, best);
            }
        }
    }

    const DataMatrix& data_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}

NeighborLists knn_brute_force(const DataMatrix& data, std::size_t k, int threads) {
    check_k(data, k);
    const std::size_t n = data.rows();
    NeighborLists out{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            BestK best(k);
            auto query = data.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    best.offer(squared_euclidean(query, data.row(j)), j);
                }
            }
            best.drain_into(out.indices.data() + i * k, out.sq_distances.data() + i * k);
        }
    });
    return out;
}

NeighborLists knn_vptree(const DataMatrix& data, std::size_t k, int threads) {
    check_k(data, k);
    const std::size_t n = data.rows();
    const VantagePointTree tree(data);
    NeighborLists out{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            BestK best(k);
            tree.search(i, best);
            best.drain_into(out.indices.data() + i * k, out.sq_distances.data() + i * k);
        }
    });
    return out;
}

NeighborLists knn(const DataMatrix& data, std::size_t k, int threads) {
    if (data.rows() > vptree_threshold) {
        return knn_vptree(data, k, threads);
    }
    return knn_brute_force(data, k, threads);
}

BandwidthResult calibrate_bandwidths(const NeighborLists& neighbors, double perplexity, int threads) {
    const std::size_t n = neighbors.n;
    const std::size_t k = neighbors.k;
    if (!(perplexity >= 1) || !(perplexity < static_cast<double>(k))) {
        throw std::invalid_argument("calibrate_bandwidths: perplexity must lie in [1, k) with k = "
                                    + std::to_string(k) + ", got " + std::to_string(perplexity));
    }

    BandwidthResult out;
    out.sigma.resize(n);
    out.conditional.resize(n * k);
    out.achieved_perplexity.resize(n);
    std::vector<char> converged(n, 1);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> shifted(k);
        std::vector<double> weights(k);
        for (std::size_t i = begin; i < end; ++i) {
            auto dist = neighbors.distances_of(i);
            auto row_p = std::span<double>(out.conditional.data() + i * k, k);
            const double nearest = *std::min_element(dist.begin(), dist.end());
            const double farthest = *std::max_element(dist.begin(), dist.end());
            for (std::size_t m = 0; m < k; ++m) {
                shifted[m] = dist[m] - nearest;
            }

            if (farthest == nearest) {
                // Entropy does not depend on the bandwidth.
                std::fill(row_p.begin(), row_p.end(), 1.0 / static_cast<double>(k));
                out.sigma[i] = std::numeric_limits<double>::infinity();
                out.achieved_perplexity[i] = static_cast<double>(k);
                converged[i] = std::abs(static_cast<double>(k) - perplexity) < perplexity_tolerance;
                continue;
            }

            // Returns the perplexity for a given beta and leaves unnormalized weights behind.
            auto evaluate = [&](double beta) {
                double sum = 0;
                double weighted = 0;
                for (std::size_t m = 0; m < k; ++m) {
                    weights[m] = std::exp(-beta * shifted[m]);
                    sum += weights[m];
                    weighted += weights[m] * shifted[m];
                }
                return std::exp(std::log(sum) + beta * weighted / sum);
            };

            const double mean_shift = std::accumulate(shifted.begin(), shifted.end(), 0.0) / static_cast<double>(k);
            double log_beta = -std::log(mean_shift);
            double lower = -std::numeric_limits<double>::infinity();
            double upper = std::numeric_limits<double>::infinity();
            double best_log_beta = log_beta;
            double best_gap = std::numeric_limits<double>::infinity();
            bool done = false;

            for (int step = 0; step < max_bandwidth_steps; ++step) {
                const double achieved = evaluate(std::exp(log_beta));
                const double gap = std::abs(achieved - perplexity);
                if (gap < best_gap) {
                    best_gap = gap;
                    best_log_beta = log_beta;
                }
                if (gap < perplexity_tolerance) {
                    done = true;
                    break;
                }
                // Larger beta means a sharper kernel and lower perplexity.
                if (achieved > perplexity) {
                    lower = log_beta;
                    log_beta = std::isinf(upper) ? log_beta + 1 : (lower + upper) / 2;
                } else {
                    upper = log_beta;
                    log_beta = std::isinf(lower) ? log_beta - 1 : (lower + upper) / 2;
                }
            }

            const double beta = std::exp(best_log_beta);
            out.achieved_perplexity[i] = evaluate(beta);
            const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
            for (std::size_t m = 0; m < k; ++m) {
                row_p[m] = weights[m] / total;
            }
            out.sigma[i] = std::sqrt(1 / (2 * beta));
            converged[i] = done;
        }
    });

    out.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
    return out;
}

SparseAffinities SparseAffinities::from_entries(std::size_t n, std::vector<Entry> entries) {
    for (const auto& e : entries) {
        if (e.row >= n || e.col >= n) {
            throw std::invalid_argument("SparseAffinities: entry (" + std::to_string(e.row) + ", "
                                        + std::to_string(e.col) + ") out of range for n = " + std::to_string(n));
        }
        if (e.row == e.col) {
            throw std::invalid_argument("SparseAffinities: diagonal entry at " + std::to_string(e.row));
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

    SparseAffinities out;
    out.n_ = n;
    out.row_ptr_.assign(n + 1, 0);
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (!out.cols_.empty() && e > 0 && entries[e - 1].row == entries[e].row && entries[e - 1].col == entries[e].col) {
            out.vals_.back() += entries[e].value;
            continue;
        }
        out.cols_.push_back(entries[e].col);
        out.vals_.push_back(entries[e].value);
        ++out.row_ptr_[entries[e].row + 1];
    }
    std::partial_sum(out.row_ptr_.begin(), out.row_ptr_.end(), out.row_ptr_.begin());
    return out;
}

double SparseAffinities::value(std::size_t i, std::size_t j) const {
    auto cols = columns(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) {
        return 0;
    }
    return values(i)[static_cast<std::size_t>(it - cols.begin())];
}

double SparseAffinities::total() const {
    return std::accumulate(vals_.begin(), vals_.end(), 0.0);
}

bool SparseAffinities::is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
        auto cols = columns(i);
        auto vals = values(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
            if (value(cols[e], i) != vals[e]) {
                return false;
            }
        }
    }
    return true;
}

SparseAffinities symmetrize_normalize(const NeighborLists& neighbors, std::span<const double> conditional) {
    const std::size_t n = neighbors.n;
    const std::size_t k = neighbors.k;
    if (conditional.size() != n * k) {
        throw std::invalid_argument("symmetrize_normalize: conditional probabilities do not match the neighbor lists");
    }

    // Each (i, j) receives at most one contribution from either side, and
    // IEEE addition is commutative, so the two mirrored sums agree bit for bit.
    std::vector<SparseAffinities::Entry> entries;
    entries.reserve(2 * n * k);
    const double scale = 1 / (2 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto idx = neighbors.neighbors_of(i);
        for (std::size_t m = 0; m < k; ++m) {
            const double p = conditional[i * k + m];
            entries.push_back({i, idx[m], p});
            entries.push_back({idx[m], i, p});
        }
    }
    SparseAffinities joint = SparseAffinities::from_entries(n, std::move(entries));

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : joint.values(i)) {
            total += v * scale;
        }
    }
    std::vector<SparseAffinities::Entry> scaled;
    scaled.reserve(joint.nonzeros());
    for (std::size_t i = 0; i < n; ++i) {
        auto cols = joint.columns(i);
        auto vals = joint.values(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
            scaled.push_back({i, cols[e], (vals[e] * scale) / total});
        }
    }
    return SparseAffinities::from_entries(n, std::move(scaled));
}

std::size_t neighbor_count(double perplexity) {
    return static_cast<std::size_t>(std::floor(3 * perplexity));
}

AffinityResult build_affinities(const DataMatrix& data, const AffinityOptions& options) {
    data.validate();
    const std::size_t dims = std::min({options.pca_dims, data.rows(), data.cols()});
    PcaResult pca = pca_reduce(data, dims);
    const std::size_t k = std::min(neighbor_count(options.perplexity), data.rows() - 1);
    const NeighborLists neighbors = knn(pca.data, k, options.threads);
    const BandwidthResult bandwidths = calibrate_bandwidths(neighbors, options.perplexity, options.threads);

    AffinityResult out;
    out.P = symmetrize_normalize(neighbors, bandwidths.conditional);
    out.reduced = std::move(pca.data);
    out.unconverged = bandwidths.unconverged;
    out.pca_rank_deficient = pca.rank_deficient;
    return out;
}

}

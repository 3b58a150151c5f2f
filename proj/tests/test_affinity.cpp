#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "hyptsne/affinity.hpp"
#include "test_support.hpp"

using namespace hyptsne;

namespace {

double total_variance(const DataMatrix& m) {
    double total = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double mean = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            mean += m(i, c);
        }
        mean /= static_cast<double>(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) {
            total += (m(i, c) - mean) * (m(i, c) - mean);
        }
    }
    return total;
}

// Full O(n^2 log n) neighbor oracle, ordered by (distance, index).
NeighborLists brute_oracle(const DataMatrix& data, std::size_t k) {
    NeighborLists out;
    out.n = data.rows();
    out.k = k;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < data.rows(); ++j) {
            if (j != i) {
                double d = 0;
                for (std::size_t c = 0; c < data.cols(); ++c) {
                    d += (data(i, c) - data(j, c)) * (data(i, c) - data(j, c));
                }
                all.emplace_back(d, j);
            }
        }
        std::sort(all.begin(), all.end());
        for (std::size_t m = 0; m < k; ++m) {
            out.indices.push_back(all[m].second);
            out.sq_distances.push_back(all[m].first);
        }
    }
    return out;
}

double row_perplexity(std::span<const double> p) {
    double h = 0;
    for (double v : p) {
        if (v > 0) {
            h -= v * std::log2(v);
        }
    }
    return std::exp2(h);
}

}

TEST_CASE("pca_reduce preserves variance of 2-D data") {
    const DataMatrix data = testing::random_matrix(50, 2, 1);
    const PcaResult pca = pca_reduce(data, 2);
    CHECK(pca.data.rows() == 50);
    CHECK(pca.data.cols() == 2);
    CHECK(pca.rank == 2);
    CHECK_FALSE(pca.rank_deficient);
    CHECK(std::abs(total_variance(pca.data) - total_variance(data)) < 1e-9);
    CHECK(pca.variances[0] >= pca.variances[1]);
}

TEST_CASE("pca_reduce on collinear points") {
    DataMatrix data(3, 10);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t c = 0; c < 10; ++c) {
            data(i, c) = static_cast<double>(i) * (c + 1.0);
        }
    }
    const PcaResult pca = pca_reduce(data, 2);
    CHECK(pca.rank == 1);
    CHECK(pca.rank_deficient);
    CHECK(pca.variances[1] == doctest::Approx(0).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pca.data(i, 1) == 0);
    }
}

TEST_CASE("pca_reduce full rank reconstructs the centered data") {
    const DataMatrix data = testing::random_matrix(100, 50, 2);
    const PcaResult pca = pca_reduce(data, 50);

    // Oracle: project back with the eigenvectors of an independent eigendecomposition.
    Eigen::MatrixXd x(100, 50);
    for (std::size_t i = 0; i < 100; ++i) {
        for (std::size_t c = 0; c < 50; ++c) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = data(i, c);
        }
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd y(100, 50);
    for (std::size_t i = 0; i < 100; ++i) {
        for (std::size_t c = 0; c < 50; ++c) {
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = pca.data(i, c);
        }
    }
    // Loadings recovered by least squares; a rotation must reconstruct exactly.
    const Eigen::MatrixXd loadings = y.colPivHouseholderQr().solve(centered);
    CHECK((y * loadings - centered).norm() < 1e-8);
    CHECK((loadings * loadings.transpose() - Eigen::MatrixXd::Identity(50, 50)).norm() < 1e-8);
    CHECK(std::abs(total_variance(pca.data) - total_variance(data)) < 1e-8);
}

TEST_CASE("pca_reduce sign convention is deterministic") {
    const DataMatrix data = testing::random_matrix(40, 6, 3);
    const PcaResult a = pca_reduce(data, 3);
    const PcaResult b = pca_reduce(data, 3);
    CHECK(a.data == b.data);
    CHECK_THROWS_AS(pca_reduce(data, 7), std::invalid_argument);
}

TEST_CASE("knn on a line") {
    const DataMatrix data(3, 1, {0, 1, 3});
    const NeighborLists nn = knn(data, 1);
    CHECK(nn.neighbors_of(0)[0] == 1);
    CHECK(nn.neighbors_of(1)[0] == 0);
    CHECK(nn.neighbors_of(2)[0] == 1);
    CHECK(nn.distances_of(2)[0] == 4);
}

TEST_CASE("knn with duplicated points") {
    const DataMatrix data(4, 2, {0, 0, 5, 5, 0, 0, 9, 1});
    const NeighborLists nn = knn(data, 2);
    CHECK(nn.neighbors_of(0)[0] == 2);
    CHECK(nn.distances_of(0)[0] == 0);
    CHECK(nn.neighbors_of(2)[0] == 0);
    CHECK_THROWS_AS(knn(data, 4), std::invalid_argument);
}

TEST_CASE("knn matches the brute-force oracle") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const DataMatrix data = testing::random_matrix(200, 5, 10 + seed);
        const NeighborLists oracle = brute_oracle(data, 10);
        CHECK(knn_brute_force(data, 10).indices == oracle.indices);
        CHECK(knn_vptree(data, 10).indices == oracle.indices);
        CHECK(knn_vptree(data, 10, 3).indices == oracle.indices);
    }
    // Ties: integer grid points have many equal distances.
    DataMatrix grid(400, 2);
    for (std::size_t i = 0; i < 400; ++i) {
        grid(i, 0) = static_cast<double>(i % 20);
        grid(i, 1) = static_cast<double>(i / 20);
    }
    const NeighborLists oracle = brute_oracle(grid, 8);
    CHECK(knn_vptree(grid, 8).indices == oracle.indices);
    CHECK(knn_brute_force(grid, 8).indices == oracle.indices);
}

TEST_CASE("knn agrees with the oracle up to 2000 points") {
    const DataMatrix data = testing::random_matrix(2000, 8, 20);
    const NeighborLists oracle = brute_oracle(data, 12);
    const NeighborLists tree = knn_vptree(data, 12);
    CHECK(tree.indices == oracle.indices);
    CHECK(tree.sq_distances == oracle.sq_distances);
}

TEST_CASE("calibrate_bandwidths on equidistant neighbors") {
    NeighborLists nn;
    nn.n = 2;
    nn.k = 5;
    nn.indices = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    nn.sq_distances.assign(10, 4.0);
    const BandwidthResult res = calibrate_bandwidths(nn, 5 - 1e-3);
    for (double p : res.conditional) {
        CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
    }
    CHECK(res.achieved_perplexity[0] == doctest::Approx(5).epsilon(1e-9));
}

TEST_CASE("calibrate_bandwidths reaches the target perplexity") {
    const DataMatrix data = testing::random_matrix(1000, 10, 30);
    const NeighborLists nn = knn(data, 90);
    const BandwidthResult res = calibrate_bandwidths(nn, 30);
    CHECK(res.unconverged == 0);
    for (std::size_t i = 0; i < nn.n; ++i) {
        const std::span<const double> row(res.conditional.data() + i * nn.k, nn.k);
        CHECK(std::abs(row_perplexity(row) - 30) < 1e-3);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1).epsilon(1e-12));
    }
    CHECK_THROWS_AS(calibrate_bandwidths(nn, 90), std::invalid_argument);
}

TEST_CASE("calibrate_bandwidths is smaller in a tight cluster") {
    DataMatrix data(200, 3);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0, 1);
    for (std::size_t i = 0; i < 200; ++i) {
        const bool tight = i < 100;
        for (std::size_t c = 0; c < 3; ++c) {
            data(i, c) = (tight ? 0.01 : 1.0) * normal(rng) + (tight ? 0 : 100);
        }
    }
    const NeighborLists nn = knn(data, 30);
    const BandwidthResult res = calibrate_bandwidths(nn, 10);
    const double tight = std::accumulate(res.sigma.begin(), res.sigma.begin() + 100, 0.0);
    const double loose = std::accumulate(res.sigma.begin() + 100, res.sigma.end(), 0.0);
    CHECK(tight * 10 < loose);
}

TEST_CASE("symmetrize_normalize examples") {
    NeighborLists two;
    two.n = 2;
    two.k = 1;
    two.indices = {1, 0};
    two.sq_distances = {1, 1};
    const std::vector<double> ones{1, 1};
    const SparseAffinities p2 = symmetrize_normalize(two, ones);
    CHECK(p2.value(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p2.value(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p2.value(0, 0) == 0);

    // 0 -> 1 and 1 -> 0 mutual, 2 -> 0 one-sided.
    NeighborLists three;
    three.n = 3;
    three.k = 1;
    three.indices = {1, 0, 0};
    three.sq_distances = {1, 1, 4};
    const SparseAffinities p3 = symmetrize_normalize(three, std::vector<double>{1, 1, 1});
    CHECK(p3.value(2, 0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(p3.value(0, 2) == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(p3.value(0, 1) == doctest::Approx(2.0 / 6).epsilon(1e-15));
    CHECK(p3.value(1, 2) == 0);
}

TEST_CASE("build_affinities invariants") {
    const DataMatrix data = testing::random_matrix(300, 20, 40);
    const AffinityResult res = build_affinities(data, {10, 50, 1});
    const SparseAffinities& P = res.P;
    CHECK(P.size() == 300);
    CHECK(P.is_symmetric());
    CHECK(std::abs(P.total() - 1) < 1e-9);
    CHECK(P.nonzeros() <= 2 * neighbor_count(10) * 300);
    CHECK(res.reduced.cols() == 20);

    // Independent recomputation of the total and symmetry from the stored rows.
    double total = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        auto cols = P.columns(i);
        auto vals = P.values(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
            CHECK(cols[e] != i);
            CHECK(vals[e] >= 0);
            CHECK(vals[e] == P.value(cols[e], i));
            total += vals[e];
        }
    }
    CHECK(std::abs(total - 1) < 1e-9);
}

TEST_CASE("neighbor_count") {
    CHECK(neighbor_count(30) == 90);
    CHECK(neighbor_count(5.5) == 16);
}

TEST_CASE("SparseAffinities rejects bad entries") {
    CHECK_THROWS_AS(SparseAffinities::from_entries(3, {{1, 1, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(SparseAffinities::from_entries(3, {{0, 3, 0.5}}), std::invalid_argument);
    const SparseAffinities p = SparseAffinities::from_entries(3, {{0, 1, 0.25}, {0, 1, 0.25}, {1, 0, 0.5}});
    CHECK(p.value(0, 1) == 0.5);
    CHECK(p.is_symmetric());
}

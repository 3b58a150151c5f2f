#include "hyptsne/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hyptsne/affinity.hpp"
#include "hyptsne/parallel.hpp"

namespace hyptsne {

namespace {

PoincarePoint as_disk_point(TangentVector g, bool& clamped) {
    const Vec2 v = g.vec();
    if (norm2(v) >= 1) {
        clamped = true;
    }
    return project_to_disk(v);
}

// k nearest embedded neighbors of i by hyperbolic distance, ties to the lower index.
void embedded_neighbors(std::span<const PoincarePoint> embedding, std::span<const double> alpha, std::size_t i,
                        std::size_t k, std::vector<std::pair<double, std::size_t>>& scratch, std::size_t* out) {
    const std::size_t n = embedding.size();
    scratch.clear();
    const Vec2 yi = embedding[i].vec();
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            // distance_argument is monotone in the distance.
            scratch.emplace_back(internal::distance_argument(yi, embedding[j].vec(), alpha[i], alpha[j]), j);
        }
    }
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    for (std::size_t m = 0; m < k; ++m) {
        out[m] = scratch[m].second;
    }
}

}

RelativeError relative_gradient_error(const GradientField& exact, const GradientField& approx) {
    if (exact.size() != approx.size()) {
        throw std::invalid_argument("relative_gradient_error: fields differ in length");
    }
    RelativeError out;
    double numerator = 0;
    double denominator = 0;
    const PoincarePoint origin{};
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const PoincarePoint g = as_disk_point(exact[i], out.clamped);
        const PoincarePoint h = as_disk_point(approx[i], out.clamped);
        const double diff = hyperbolic_distance(g, h);
        const double ref = hyperbolic_distance(origin, g);
        numerator += diff * diff;
        denominator += ref * ref;
    }
    if (denominator > 0) {
        out.value = std::sqrt(numerator) / std::sqrt(denominator);
    }
    return out;
}

std::optional<double> relative_cost_error(double exact_cost, double approx_cost) {
    if (exact_cost == 0) {
        return std::nullopt;
    }
    return std::abs(exact_cost - approx_cost) / exact_cost;
}

double one_nn_error(std::span<const PoincarePoint> embedding, std::span<const std::int64_t> labels, int threads) {
    const std::size_t n = embedding.size();
    if (n < 2) {
        throw std::invalid_argument("one_nn_error: need at least two points");
    }
    if (labels.size() != n) {
        throw std::invalid_argument("one_nn_error: " + std::to_string(labels.size()) + " labels for "
                                    + std::to_string(n) + " points");
    }
    std::vector<double> alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = 1 - norm2(embedding[i].vec());
    }
    std::vector<char> wrong(n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vec2 yi = embedding[i].vec();
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_j = i;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                const double x = internal::distance_argument(yi, embedding[j].vec(), alpha[i], alpha[j]);
                if (x < best) {
                    best = x;
                    best_j = j;
                }
            }
            wrong[i] = labels[best_j] != labels[i];
        }
    });
    return static_cast<double>(std::count(wrong.begin(), wrong.end(), 1)) / static_cast<double>(n);
}

PrecisionRecallCurve precision_recall(const DataMatrix& data_hd, std::span<const PoincarePoint> embedding,
                                      std::size_t k_max, int threads) {
    const std::size_t n = embedding.size();
    if (data_hd.rows() != n) {
        throw std::invalid_argument("precision_recall: data and embedding differ in size");
    }
    if (k_max == 0 || k_max >= n) {
        throw std::invalid_argument("precision_recall: need 0 < k_max < n");
    }

    const NeighborLists reference = knn(data_hd, k_max, threads);
    std::vector<double> alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = 1 - norm2(embedding[i].vec());
    }

    // hits[i * k_max + (k-1)] = |TP_k| for point i.
    std::vector<std::size_t> hits(n * k_max);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> scratch;
        std::vector<std::size_t> low(k_max);
        for (std::size_t i = begin; i < end; ++i) {
            embedded_neighbors(embedding, alpha, i, k_max, scratch, low.data());
            auto high = reference.neighbors_of(i);
            std::vector<std::size_t> sorted_high(high.begin(), high.end());
            std::sort(sorted_high.begin(), sorted_high.end());
            std::size_t tp = 0;
            for (std::size_t k = 0; k < k_max; ++k) {
                if (std::binary_search(sorted_high.begin(), sorted_high.end(), low[k])) {
                    ++tp;
                }
                hits[i * k_max + k] = tp;
            }
        }
    });

    PrecisionRecallCurve out;
    out.k_max = k_max;
    out.precision.assign(k_max, 0);
    out.recall.assign(k_max, 0);
    for (std::size_t k = 0; k < k_max; ++k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            total += static_cast<double>(hits[i * k_max + k]);
        }
        const double mean_tp = total / static_cast<double>(n);
        out.precision[k] = mean_tp / static_cast<double>(k + 1);
        out.recall[k] = mean_tp / static_cast<double>(k_max);
    }
    return out;
}

double mean_precision_gap(const PrecisionRecallCurve& a, const PrecisionRecallCurve& b) {
    if (a.k_max != b.k_max || a.precision.size() != b.precision.size() || a.precision.empty()) {
        throw std::invalid_argument("mean_precision_gap: curves have different neighborhood ranges");
    }
    double total = 0;
    for (std::size_t k = 0; k < a.precision.size(); ++k) {
        total += std::abs(a.precision[k] - b.precision[k]);
    }
    return total / static_cast<double>(a.precision.size());
}

double ScalingEstimate::mean_alpha() const {
    if (alphas.empty()) {
        return 0;
    }
    return std::accumulate(alphas.begin(), alphas.end(), 0.0) / static_cast<double>(alphas.size());
}

ScalingEstimate estimate_alpha(std::span<const std::size_t> sizes, std::span<const double> times) {
    if (sizes.size() < 2 || sizes.size() != times.size()) {
        throw std::invalid_argument("estimate_alpha: need at least two (size, time) pairs of equal count");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(times[i] > 0)) {
            throw std::invalid_argument("estimate_alpha: non-positive time at position " + std::to_string(i));
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw std::invalid_argument("estimate_alpha: sizes must be strictly increasing");
        }
    }
    ScalingEstimate out;
    out.sizes.assign(sizes.begin(), sizes.end());
    out.mean_iter_times.assign(times.begin(), times.end());
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        out.alphas.push_back((std::log(times[i + 1]) - std::log(times[i]))
                             / (std::log(static_cast<double>(sizes[i + 1])) - std::log(static_cast<double>(sizes[i]))));
    }
    return out;
}

bool is_scheduled_iteration(std::size_t phase_iteration, std::size_t phase_length) {
    return phase_iteration % 50 == 0 || phase_iteration + 1 == phase_length;
}

TimingSummary summarize(std::span<const double> seconds) {
    TimingSummary out;
    out.count = seconds.size();
    if (seconds.empty()) {
        return out;
    }
    out.min = *std::min_element(seconds.begin(), seconds.end());
    out.max = *std::max_element(seconds.begin(), seconds.end());
    out.avg = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
    double var = 0;
    for (double s : seconds) {
        var += (s - out.avg) * (s - out.avg);
    }
    out.std = std::sqrt(var / static_cast<double>(seconds.size()));
    return out;
}

}

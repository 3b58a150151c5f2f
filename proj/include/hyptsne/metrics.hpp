#ifndef HYPTSNE_METRICS_HPP
#define HYPTSNE_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "data_matrix.hpp"
#include "geometry.hpp"
#include "objective.hpp"

/**
 * @file metrics.hpp
 *
 * @brief Evaluation measures: gradient and cost errors, 1-NN error,
 * precision/recall curves, run-time scaling exponents and timing summaries.
 */

namespace hyptsne {

struct RelativeError {
    /** Empty when the reference is zero and the ratio is undefined. */
    std::optional<double> value;
    /** Set when some gradient vector had norm >= 1 and was pulled into the disk. */
    bool clamped = false;
};

/**
 * sqrt(sum_i d(g_i, h_i)^2) / sqrt(sum_i d(0, g_i)^2), with gradient vectors
 * read as disk points. Throws `std::invalid_argument` on length mismatch.
 */
RelativeError relative_gradient_error(const GradientField& exact, const GradientField& approx);

/** |C - C'| / C; empty if C is zero. */
std::optional<double> relative_cost_error(double exact_cost, double approx_cost);

/**
 * Fraction of points whose hyperbolic nearest neighbor (self excluded, ties
 * to the lower index) carries a different label. Throws for n < 2.
 */
double one_nn_error(std::span<const PoincarePoint> embedding, std::span<const std::int64_t> labels, int threads = 1);

struct PrecisionRecallCurve {
    std::size_t k_max = 30;
    /** Entry k-1 holds the value for neighborhood size k. */
    std::vector<double> precision;
    std::vector<double> recall;
};

/**
 * Average over points of |N_kmax(X) & N_k(Y)| / k and / k_max for k = 1..k_max,
 * with Euclidean neighborhoods in `data_hd` and hyperbolic ones in `embedding`.
 */
PrecisionRecallCurve precision_recall(const DataMatrix& data_hd, std::span<const PoincarePoint> embedding,
                                      std::size_t k_max = 30, int threads = 1);

/** Mean |PR_a(k) - PR_b(k)| over k; the two curves share recall values k / k_max. */
double mean_precision_gap(const PrecisionRecallCurve& a, const PrecisionRecallCurve& b);

struct ScalingEstimate {
    std::vector<std::size_t> sizes;
    std::vector<double> mean_iter_times;
    /** alpha between consecutive sizes; one fewer entry than `sizes`. */
    std::vector<double> alphas;

    double mean_alpha() const;
};

/**
 * alpha_i = (log t_{i+1} - log t_i) / (log n_{i+1} - log n_i).
 * Throws `std::invalid_argument` for fewer than two sizes, non-increasing
 * sizes or non-positive times.
 */
ScalingEstimate estimate_alpha(std::span<const std::size_t> sizes, std::span<const double> times);

/** Iterations at which costs and gradient errors are sampled: every 50th and the last of the phase. */
bool is_scheduled_iteration(std::size_t phase_iteration, std::size_t phase_length);

struct TimingSummary {
    std::size_t count = 0;
    double min = 0;
    double avg = 0;
    double std = 0;
    double max = 0;
};

/** Population standard deviation; all zeros for empty input. */
TimingSummary summarize(std::span<const double> seconds);

}

#endif

#ifndef HYPTSNE_OPTIMIZER_HPP
#define HYPTSNE_OPTIMIZER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affinity.hpp"
#include "data_matrix.hpp"
#include "geometry.hpp"
#include "objective.hpp"
#include "quadtree.hpp"

/**
 * @file optimizer.hpp
 *
 * @brief Riemannian gradient descent on the Poincare disk with momentum,
 * gains and early exaggeration.
 */

namespace hyptsne {

struct OptimizerConfig {
    double perplexity = 30;
    double theta = 0.5;
    double exaggeration_factor = 12;
    std::size_t exaggeration_iters = 250;
    /** Iterations after early exaggeration. */
    std::size_t max_iters = 750;
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    /** Defaults to n / 12000 when unset. */
    std::optional<double> learning_rate;
    double stop_boundary_eps = 1e-4;
    double projection_eps = default_projection_epsilon;
    SplitRule split_rule = SplitRule::EqualLength;
    bool exact_mode = false;
    bool use_gains = true;
    double gain_floor = 0.01;
    std::uint64_t seed = 42;
    int threads = 1;

    /** Throws `std::invalid_argument` on non-positive rates, negative theta or a factor below 1. */
    void validate() const;
};

/** n / (12 * 1000). */
double default_learning_rate(std::size_t n);

enum class Phase { Exaggeration, Main };

const char* to_string(Phase phase);

struct OptimizerState {
    std::vector<PoincarePoint> embedding;
    /** Raw 2-D momentum buffer, reused at the moved point without transport. */
    std::vector<Vec2> velocity;
    /** Per-coordinate gains. */
    std::vector<Vec2> gains;
    std::size_t iteration = 0;
    Phase phase = Phase::Exaggeration;
};

inline constexpr double initial_max_norm = 1e-3;
inline constexpr double degenerate_jitter = 1e-5;

/**
 * Start from the first two columns of `principal` (PCA-ordered data), scaled
 * so the largest norm is `initial_max_norm`. If every row projects to the
 * origin, points are jittered with seeded Gaussian noise of scale
 * `degenerate_jitter` instead.
 */
OptimizerState initialize(const DataMatrix& principal, std::uint64_t seed);

/** Thrown when a gradient or position stops being finite. */
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepOutcome {
    /** The variation used for this step, before any metric scaling. */
    GradientField gradient;
    TraversalStats stats;
};

/**
 * One iteration: rebuild the tree (unless exact), evaluate the gradient with
 * exaggerated P during the exaggeration phase, scale by 1/lambda, update gains
 * and velocity, move through the exponential map and pull any point beyond
 * norm 1 - `projection_eps` back to that radius.
 */
StepOutcome step(OptimizerState& state, const SparseAffinities& P, const OptimizerConfig& config, double learning_rate);

enum class StopReason { Boundary, MaxIters, Error };

const char* to_string(StopReason reason);

struct IterationRecord {
    std::size_t iteration = 0;
    Phase phase = Phase::Exaggeration;
    /** Index within the phase. */
    std::size_t phase_iteration = 0;
    double seconds = 0;
    double max_norm = 0;
    std::optional<double> cost;
    std::optional<double> gradient_error;
    /** Some gradient vector had to be pulled into the disk for the error measure. */
    bool gradient_error_clamped = false;
    std::size_t visits = 0;
};

enum class CostSampling { None, Schedule, Every };

struct RunOptions {
    CostSampling cost_sampling = CostSampling::None;
    /** Compare against the exact gradient at scheduled iterations (accelerated mode only). */
    bool measure_gradient_error = false;
    std::function<void(const IterationRecord&)> progress;
};

struct RunResult {
    OptimizerState state;
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIters;
    double learning_rate = 0;
    std::string error_message;
};

/**
 * Run exaggeration then main iterations from `initial`, stopping early once a
 * point reaches norm 1 - stop_boundary_eps. Per-iteration wall time covers the
 * step only; cost and gradient-error sampling are excluded. An
 * `OptimizationError` ends the run with `StopReason::Error` and its message;
 * the state is left as it was before the failing step.
 */
RunResult run(const SparseAffinities& P, OptimizerState initial, const OptimizerConfig& config,
              const RunOptions& options = {});

double max_norm(std::span<const PoincarePoint> embedding);

}

#endif

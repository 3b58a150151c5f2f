#include "hyptsne/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "hyptsne/metrics.hpp"

namespace hyptsne {

void OptimizerConfig::validate() const {
    if (!(perplexity > 0)) {
        throw std::invalid_argument("OptimizerConfig: perplexity must be positive");
    }
    if (!(theta >= 0)) {
        throw std::invalid_argument("OptimizerConfig: theta must be non-negative");
    }
    if (!(exaggeration_factor >= 1)) {
        throw std::invalid_argument("OptimizerConfig: exaggeration factor must be at least 1");
    }
    if (learning_rate && !(*learning_rate > 0)) {
        throw std::invalid_argument("OptimizerConfig: learning rate must be positive");
    }
    if (!(momentum_early >= 0) || !(momentum_late >= 0)) {
        throw std::invalid_argument("OptimizerConfig: momentum must be non-negative");
    }
    if (!(stop_boundary_eps > 0) || !(projection_eps > 0) || !(gain_floor > 0)) {
        throw std::invalid_argument("OptimizerConfig: boundary margins and gain floor must be positive");
    }
}

double default_learning_rate(std::size_t n) {
    return static_cast<double>(n) / (12.0 * 1000.0);
}

const char* to_string(Phase phase) {
    return phase == Phase::Exaggeration ? "exaggeration" : "main";
}

const char* to_string(StopReason reason) {
    switch (reason) {
    case StopReason::Boundary:
        return "boundary";
    case StopReason::MaxIters:
        return "max_iters";
    case StopReason::Error:
        return "error";
    }
    return "error";
}

double max_norm(std::span<const PoincarePoint> embedding) {
    double out = 0;
    for (auto p : embedding) {
        out = std::max(out, norm(p.vec()));
    }
    return out;
}

OptimizerState initialize(const DataMatrix& principal, std::uint64_t seed) {
    const std::size_t n = principal.rows();
    if (n < 2) {
        throw std::invalid_argument("initialize: need at least two points");
    }
    OptimizerState state;
    state.embedding.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = principal.cols() > 0 ? principal(i, 0) : 0;
        const double y = principal.cols() > 1 ? principal(i, 1) : 0;
        state.embedding[i] = {x, y};
    }

    const double largest = max_norm(state.embedding);
    if (largest > 0 && std::isfinite(largest)) {
        const double scale = initial_max_norm / largest;
        for (auto& p : state.embedding) {
            p = PoincarePoint::from(scale * p.vec());
        }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0, degenerate_jitter);
        for (auto& p : state.embedding) {
            p.x = noise(rng);
            p.y = noise(rng);
        }
    }

    state.velocity.assign(n, Vec2{});
    state.gains.assign(n, Vec2{1, 1});
    return state;
}

namespace {

[[noreturn]] void report_non_finite(const OptimizerState& state, std::size_t point, const char* what, Vec2 value) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at iteration " << state.iteration << " (" << to_string(state.phase)
        << " phase) for point " << point << ": value (" << value.x << ", " << value.y << "), position ("
        << state.embedding[point].x << ", " << state.embedding[point].y << "), velocity ("
        << state.velocity[point].x << ", " << state.velocity[point].y << "), max norm "
        << max_norm(state.embedding);
    throw OptimizationError(msg.str());
}

double update_gain(double gain, double gradient, double velocity, double floor) {
    // Grow while the gradient keeps opposing the accumulated motion.
    gain = (gradient > 0) != (velocity > 0) ? gain + 0.2 : gain * 0.8;
    return std::max(gain, floor);
}

}

StepOutcome step(OptimizerState& state, const SparseAffinities& P, const OptimizerConfig& config, double learning_rate) {
    const bool exaggerating = state.phase == Phase::Exaggeration;
    const double attraction_scale = exaggerating ? config.exaggeration_factor : 1;
    const double momentum = exaggerating ? config.momentum_early : config.momentum_late;

    StepOutcome out;
    if (config.exact_mode) {
        out.gradient = gradient_exact(P, state.embedding, attraction_scale, config.threads).field;
    } else {
        const PolarQuadtree tree(state.embedding, config.split_rule);
        GradientResult result = gradient_accelerated(P, state.embedding, tree, config.theta, attraction_scale, config.threads);
        out.gradient = std::move(result.field);
        out.stats = result.stats;
    }

    const std::size_t n = state.embedding.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 grad = out.gradient[i].vec();
        if (!std::isfinite(grad.x) || !std::isfinite(grad.y)) {
            report_non_finite(state, i, "gradient", grad);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 y = state.embedding[i].vec();
        const Vec2 grad = out.gradient[i].vec();
        const double inverse_metric = (1 - norm2(y)) / 2;
        const Vec2 direction = -inverse_metric * grad;

        Vec2& gain = state.gains[i];
        Vec2& velocity = state.velocity[i];
        if (config.use_gains) {
            gain.x = update_gain(gain.x, grad.x, velocity.x, config.gain_floor);
            gain.y = update_gain(gain.y, grad.y, velocity.y, config.gain_floor);
        }
        velocity = momentum * velocity + learning_rate * Vec2{gain.x * direction.x, gain.y * direction.y};
        if (!std::isfinite(velocity.x) || !std::isfinite(velocity.y)) {
            report_non_finite(state, i, "velocity", velocity);
        }
        const PoincarePoint moved = exp_map(state.embedding[i], TangentVector::from(velocity));
        // Saturated steps can land within rounding of the rim; pull those back as well.
        const double limit = 1 - config.projection_eps;
        const double len = norm(moved.vec());
        state.embedding[i] = len > limit ? PoincarePoint::from((limit / len) * moved.vec()) : moved;
    }

    ++state.iteration;
    return out;
}

RunResult run(const SparseAffinities& P, OptimizerState initial, const OptimizerConfig& config, const RunOptions& options) {
    config.validate();
    const std::size_t n = initial.embedding.size();
    if (P.size() != n) {
        throw std::invalid_argument("run: affinities and initial embedding differ in size");
    }

    RunResult out;
    out.learning_rate = config.learning_rate.value_or(default_learning_rate(n));
    out.state = std::move(initial);
    out.stop_reason = StopReason::MaxIters;

    const std::size_t total = config.exaggeration_iters + config.max_iters;
    using clock = std::chrono::steady_clock;

    for (std::size_t it = out.state.iteration; it < total; ++it) {
        const bool exaggerating = it < config.exaggeration_iters;
        out.state.phase = exaggerating ? Phase::Exaggeration : Phase::Main;
        const std::size_t phase_iteration = exaggerating ? it : it - config.exaggeration_iters;
        const std::size_t phase_length = exaggerating ? config.exaggeration_iters : config.max_iters;
        const bool scheduled = is_scheduled_iteration(phase_iteration, phase_length);

        IterationRecord record;
        record.iteration = it;
        record.phase = out.state.phase;
        record.phase_iteration = phase_iteration;

        if (options.cost_sampling == CostSampling::Every
            || (options.cost_sampling == CostSampling::Schedule && scheduled)) {
            record.cost = kl_cost(P, out.state.embedding, config.threads);
        }

        std::optional<GradientField> reference;
        if (options.measure_gradient_error && scheduled && !config.exact_mode) {
            const double scale = exaggerating ? config.exaggeration_factor : 1;
            reference = gradient_exact(P, out.state.embedding, scale, config.threads).field;
        }

        const OptimizerState before = out.state;
        const auto start = clock::now();
        StepOutcome outcome;
        try {
            outcome = step(out.state, P, config, out.learning_rate);
        } catch (const OptimizationError& e) {
            out.state = before;
            out.stop_reason = StopReason::Error;
            out.error_message = e.what();
            break;
        }
        record.seconds = std::chrono::duration<double>(clock::now() - start).count();
        record.visits = outcome.stats.visits();

        if (reference) {
            const RelativeError err = relative_gradient_error(*reference, outcome.gradient);
            record.gradient_error = err.value;
            record.gradient_error_clamped = err.clamped;
        }
        record.max_norm = max_norm(out.state.embedding);
        out.records.push_back(record);
        if (options.progress) {
            options.progress(record);
        }

        if (record.max_norm >= 1 - config.stop_boundary_eps) {
            out.stop_reason = StopReason::Boundary;
            break;
        }
    }
    return out;
}

}

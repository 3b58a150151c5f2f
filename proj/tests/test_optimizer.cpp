#include <doctest.h>

#include <cmath>

#include "hyptsne/metrics.hpp"
#include "hyptsne/optimizer.hpp"
#include "hyptsne/pipeline.hpp"
#include "hyptsne/synthetic.hpp"
#include "test_support.hpp"

using namespace hyptsne;

namespace {

OptimizerState state_from(std::vector<PoincarePoint> pts) {
    OptimizerState s;
    const std::size_t n = pts.size();
    s.embedding = std::move(pts);
    s.velocity.assign(n, Vec2{});
    s.gains.assign(n, Vec2{1, 1});
    return s;
}

SparseAffinities single_pair(std::size_t n) {
    return SparseAffinities::from_entries(n, {{0, 1, 0.5}, {1, 0, 0.5}});
}

OptimizerConfig short_config(std::size_t early, std::size_t main) {
    OptimizerConfig c;
    c.exaggeration_iters = early;
    c.max_iters = main;
    return c;
}

}

TEST_CASE("default learning rate") {
    CHECK(default_learning_rate(12000) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(default_learning_rate(600) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("config validation") {
    OptimizerConfig c;
    CHECK_NOTHROW(c.validate());
    c.theta = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.exaggeration_factor = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initialize scales the leading components") {
    DataMatrix principal(4, 3, {3, 4, 9, -6, 0, 9, 0, 1.5, 9, 1, 1, 9});
    const OptimizerState s = initialize(principal, 7);
    CHECK(max_norm(s.embedding) == doctest::Approx(initial_max_norm).epsilon(1e-14));
    // Largest row is (-6, 0), norm 6.
    CHECK(s.embedding[0].x == doctest::Approx(3 * initial_max_norm / 6).epsilon(1e-14));
    CHECK(s.embedding[0].y == doctest::Approx(4 * initial_max_norm / 6).epsilon(1e-14));
    CHECK(s.embedding[2].y == doctest::Approx(1.5 * initial_max_norm / 6).epsilon(1e-14));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(s.velocity[i] == Vec2{});
        CHECK(s.gains[i] == Vec2{1, 1});
    }
    CHECK(s.iteration == 0);
    CHECK(s.phase == Phase::Exaggeration);
}

TEST_CASE("initialize jitters a degenerate start") {
    const DataMatrix zeros(5, 2);
    const OptimizerState a = initialize(zeros, 11);
    const OptimizerState b = initialize(zeros, 11);
    const OptimizerState c = initialize(zeros, 12);
    CHECK(a.embedding == b.embedding);
    CHECK(a.embedding != c.embedding);
    CHECK(max_norm(a.embedding) > 0);
    CHECK(max_norm(a.embedding) < 1e-3);
}

TEST_CASE("zero gradient with zero velocity is a fixed point") {
    OptimizerState s = state_from({{0.1, 0.2}, {-0.3, 0.05}});
    s.phase = Phase::Main;
    const auto before = s.embedding;
    OptimizerConfig c;
    c.exact_mode = true;
    for (int k = 0; k < 5; ++k) {
        step(s, single_pair(2), c, 1.0);
    }
    // p = q, so the gradient vanishes up to rounding.
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(norm(s.embedding[i].vec() - before[i].vec()) < 1e-14);
    }
    CHECK(s.iteration == 5);
}

TEST_CASE("one step follows the update rule") {
    const auto pts = testing::random_disk_points(30, 0.6, 60);
    const SparseAffinities P = testing::random_affinities(30, 4, 61);
    OptimizerConfig c;
    c.exact_mode = true;
    OptimizerState s = state_from(pts);
    s.phase = Phase::Main;
    s.velocity.assign(30, Vec2{0.01, -0.02});
    const auto velocity = s.velocity;
    const double eta = 0.3;
    const GradientField g = gradient_exact(P, pts).field;
    step(s, P, c, eta);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 grad = g[i].vec();
        const Vec2 dir = -((1 - norm2(pts[i].vec())) / 2) * grad;
        // Gain grows when the gradient sign differs from the velocity sign.
        const double gx = (grad.x > 0) != (velocity[i].x > 0) ? 1.2 : 0.8;
        const double gy = (grad.y > 0) != (velocity[i].y > 0) ? 1.2 : 0.8;
        const Vec2 v = 0.8 * velocity[i] + eta * Vec2{gx * dir.x, gy * dir.y};
        const PoincarePoint expected = project_to_disk(exp_map(pts[i], TangentVector::from(v)).vec());
        CHECK(s.embedding[i] == expected);
        CHECK(s.gains[i] == Vec2{gx, gy});
    }
}

TEST_CASE("a small enough step decreases the cost") {
    const auto pts = testing::random_disk_points(100, 0.5, 62);
    const SparseAffinities P = testing::random_affinities(100, 4, 63);
    OptimizerConfig c;
    c.exact_mode = true;
    // The exaggerated step descends on -s sum p log w + log Z.
    const auto objective = [&](std::span<const PoincarePoint> y, double s) {
        const DenseSimilarities q = q_matrix_exact(y);
        double value = std::log(q.z);
        for (std::size_t i = 0; i < P.size(); ++i) {
            auto cols = P.columns(i);
            auto vals = P.values(i);
            for (std::size_t e = 0; e < cols.size(); ++e) {
                value -= s * vals[e] * std::log(q(i, cols[e]) * q.z);
            }
        }
        return value;
    };
    for (Phase phase : {Phase::Exaggeration, Phase::Main}) {
        const double s = phase == Phase::Exaggeration ? c.exaggeration_factor : 1;
        const double before = objective(pts, s);
        double eta = 1;
        bool decreased = false;
        for (int halving = 0; halving <= 10 && !decreased; ++halving, eta /= 2) {
            OptimizerState state = state_from(pts);
            state.phase = phase;
            step(state, P, c, eta);
            decreased = objective(state.embedding, s) < before;
        }
        CHECK(decreased);
    }
}

TEST_CASE("run with no iterations leaves the state alone") {
    const auto pts = testing::random_disk_points(20, 0.5, 64);
    const RunResult r = run(testing::random_affinities(20, 3, 65), state_from(pts), short_config(0, 0));
    CHECK(r.records.empty());
    CHECK(r.state.embedding == pts);
    CHECK(r.stop_reason == StopReason::MaxIters);
    CHECK(r.learning_rate == doctest::Approx(20.0 / 12000));
}

TEST_CASE("run records phases and the cost schedule") {
    const auto pts = testing::random_disk_points(60, 0.01, 66);
    const SparseAffinities P = testing::random_affinities(60, 4, 67);
    RunOptions opts;
    opts.cost_sampling = CostSampling::Schedule;
    opts.measure_gradient_error = true;
    const RunResult r = run(P, state_from(pts), short_config(60, 55), opts);
    REQUIRE(r.records.size() == 115);
    for (const auto& rec : r.records) {
        const bool early = rec.iteration < 60;
        CHECK((rec.phase == Phase::Exaggeration) == early);
        CHECK(rec.phase_iteration == (early ? rec.iteration : rec.iteration - 60));
        const bool scheduled = rec.phase_iteration % 50 == 0 || rec.phase_iteration + 1 == (early ? 60u : 55u);
        CHECK(rec.cost.has_value() == scheduled);
        CHECK(rec.gradient_error.has_value() == scheduled);
        CHECK(rec.seconds >= 0);
        CHECK(rec.visits > 0);
    }
    // The first cost is taken on the starting layout with the unscaled affinities.
    CHECK(*r.records[0].cost == doctest::Approx(kl_cost(P, pts)).epsilon(1e-12));
    CHECK(r.state.iteration == 115);
}

TEST_CASE("cost sampling modes") {
    const auto pts = testing::random_disk_points(30, 0.01, 68);
    const SparseAffinities P = testing::random_affinities(30, 3, 69);
    RunOptions every;
    every.cost_sampling = CostSampling::Every;
    for (const auto& rec : run(P, state_from(pts), short_config(3, 3), every).records) {
        CHECK(rec.cost.has_value());
        CHECK_FALSE(rec.gradient_error.has_value());
    }
    for (const auto& rec : run(P, state_from(pts), short_config(3, 3)).records) {
        CHECK_FALSE(rec.cost.has_value());
    }
}

TEST_CASE("a huge learning rate stops at the boundary") {
    const auto pts = testing::random_disk_points(50, 0.3, 70);
    OptimizerConfig c = short_config(10, 100);
    c.learning_rate = 1e4;
    const RunResult r = run(testing::random_affinities(50, 4, 71), state_from(pts), c);
    CHECK(r.stop_reason == StopReason::Boundary);
    CHECK(r.records.size() < 110);
    CHECK(r.records.back().max_norm >= 1 - c.stop_boundary_eps);
    for (auto p : r.state.embedding) {
        CHECK(norm(p.vec()) < 1);
    }
}

TEST_CASE("non-finite gradients end the run with an error") {
    auto pts = testing::random_disk_points(10, 0.5, 72);
    pts[3] = {std::nan(""), 0};
    OptimizerConfig c = short_config(2, 2);
    c.exact_mode = true;
    const SparseAffinities P = testing::random_affinities(10, 3, 73);
    OptimizerState s = state_from(pts);
    CHECK_THROWS_AS(step(s, P, c, 0.1), OptimizationError);

    const RunResult r = run(P, state_from(pts), c);
    CHECK(r.stop_reason == StopReason::Error);
    CHECK(r.records.empty());
    CHECK(r.error_message.find("non-finite gradient at iteration 0") != std::string::npos);
    CHECK(r.state.iteration == 0);
}

TEST_CASE("steps toward the rim stay at the projection radius") {
    OptimizerState s = state_from({{0.9999, 0}, {0, -0.3}, {0.2, 0.1}});
    s.phase = Phase::Main;
    s.velocity = {Vec2{1e3, 0}, Vec2{0, -1e3}, Vec2{0, 0}};
    OptimizerConfig c;
    c.exact_mode = true;
    c.use_gains = false;
    for (int k = 0; k < 20; ++k) {
        step(s, SparseAffinities::from_entries(3, {{0, 2, 0.5}, {2, 0, 0.5}}), c, 1e-9);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(norm(s.embedding[i].vec()) <= 1 - c.projection_eps);
        }
    }
    CHECK(norm(s.embedding[0].vec()) == doctest::Approx(1 - c.projection_eps).epsilon(1e-15));
}

TEST_CASE("runs are bit-identical across repeats and thread counts") {
    const auto pts = testing::random_disk_points(300, 0.01, 74);
    const SparseAffinities P = testing::random_affinities(300, 5, 75);
    OptimizerConfig c = short_config(20, 20);
    const RunResult a = run(P, state_from(pts), c);
    const RunResult b = run(P, state_from(pts), c);
    c.threads = 4;
    const RunResult d = run(P, state_from(pts), c);
    CHECK(a.state.embedding == b.state.embedding);
    CHECK(a.state.embedding == d.state.embedding);
}

TEST_CASE("theta 0 runs match exact runs bit for bit") {
    const auto pts = testing::random_disk_points(120, 0.01, 76);
    const SparseAffinities P = testing::random_affinities(120, 5, 77);
    OptimizerConfig c = short_config(15, 15);
    c.theta = 0;
    const RunResult tree = run(P, state_from(pts), c);
    c.exact_mode = true;
    const RunResult exact = run(P, state_from(pts), c);
    CHECK(tree.state.embedding == exact.state.embedding);
}

TEST_CASE("three Gaussian classes separate") {
    MixtureOptions m;
    m.n = 600;
    m.classes = 3;
    m.dims = 20;
    const Dataset data = gaussian_mixture(m);
    const PreparedInput in = prepare(data.data, 30, 20, 1, 4);
    OptimizerConfig c = short_config(250, 250);
    c.threads = 4;
    RunOptions opts;
    opts.cost_sampling = CostSampling::Schedule;
    const RunResult r = run(in.affinities.P, in.initial, c, opts);
    CHECK(r.stop_reason != StopReason::Error);
    CHECK(one_nn_error(r.state.embedding, *data.labels) < 0.05);

    // The main phase lowers the cost overall.
    std::vector<double> main_costs;
    for (const auto& rec : r.records) {
        if (rec.phase == Phase::Main && rec.cost) {
            main_costs.push_back(*rec.cost);
        }
    }
    REQUIRE(main_costs.size() >= 2);
    CHECK(main_costs.back() < main_costs.front());
}

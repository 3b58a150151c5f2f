#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hyptsne/geometry.hpp"
#include "test_support.hpp"

using namespace hyptsne;

namespace {

double central_difference(PoincarePoint yi, PoincarePoint yj, int axis, double h) {
    PoincarePoint plus = yi;
    PoincarePoint minus = yi;
    (axis == 0 ? plus.x : plus.y) += h;
    (axis == 0 ? minus.x : minus.y) -= h;
    return (hyperbolic_distance(plus, yj) - hyperbolic_distance(minus, yj)) / (2 * h);
}

}

TEST_CASE("hyperbolic_distance examples") {
    CHECK(hyperbolic_distance({0, 0}, {0, 0}) == 0);
    // acosh(5/3) = log(5/3 + 4/3) = log 3.
    CHECK(hyperbolic_distance({0, 0}, {0.5, 0}) == doctest::Approx(std::log(3.0)).epsilon(1e-14));

    // Points on a diameter: d = 2 artanh|a| + 2 artanh|b| (radial additivity through the origin).
    const double a = 1 - 1e-4;
    const double d = hyperbolic_distance({-a, 0}, {a, 0});
    CHECK(d == doctest::Approx(4 * std::atanh(a)).epsilon(1e-9));
    CHECK(d == doctest::Approx(19.8068751025721727).epsilon(1e-9));
}

TEST_CASE("hyperbolic_distance rejects boundary points") {
    CHECK_THROWS_AS(hyperbolic_distance({1, 0}, {0, 0}), std::domain_error);
    CHECK_THROWS_AS(hyperbolic_distance({0, 0}, {0.8, 0.7}), std::domain_error);
}

TEST_CASE("hyperbolic_distance is a metric on samples") {
    const auto pts = testing::random_disk_points(300, 0.995, 11);
    for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
        const auto a = pts[i];
        const auto b = pts[i + 1];
        const auto c = pts[i + 2];
        const double ab = hyperbolic_distance(a, b);
        CHECK(ab > 0);
        CHECK(std::abs(ab - hyperbolic_distance(b, a)) <= 1e-12 * std::max(1.0, ab));
        CHECK(hyperbolic_distance(a, a) == 0);
        CHECK(hyperbolic_distance(a, c) <= ab + hyperbolic_distance(b, c) + 1e-12);
    }
}

TEST_CASE("distance agrees with the polar-coordinate form") {
    const auto pts = testing::random_disk_points(200, 0.99, 12);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        const auto a = pts[i];
        const auto b = pts[i + 1];
        const double polar = polar_distance(hyperbolic_radius(a), polar_angle(a), hyperbolic_radius(b), polar_angle(b));
        CHECK(polar == doctest::Approx(hyperbolic_distance(a, b)).epsilon(1e-10));
    }
}

TEST_CASE("metric_factor") {
    CHECK(metric_factor({0, 0}) == 2);
    CHECK(metric_factor({0.5, 0}) == doctest::Approx(8.0 / 3).epsilon(1e-15));
    CHECK(metric_factor({0.9, 0}) == doctest::Approx(2 / (1 - 0.81)).epsilon(1e-14));
    CHECK(metric_factor({0, 0.3}) < metric_factor({0.31, 0}));
    CHECK_THROWS_AS(metric_factor({0.6, 0.8}), std::domain_error);
}

TEST_CASE("distance_gradient matches central differences") {
    const double h = 1e-6;
    auto check = [&](PoincarePoint yi, PoincarePoint yj) {
        const TangentVector g = distance_gradient(yi, yj);
        const Vec2 fd{central_difference(yi, yj, 0, h), central_difference(yi, yj, 1, h)};
        CHECK(testing::relative_difference(g.vec(), fd) < 1e-5);
    };
    check({0.2, 0.1}, {-0.3, 0.4});

    const auto pts = testing::random_disk_points(100, 0.95, 13);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        check(pts[i], pts[i + 1]);
    }
}

TEST_CASE("distance_gradient sign and singular guard") {
    const TangentVector g = distance_gradient({0.5, 0}, {0.1, 0});
    CHECK(g.dx > 0);
    CHECK(central_difference({0.5, 0}, {0.1, 0}, 0, 1e-6) > 0);

    const TangentVector near = distance_gradient({0.1, 0.1}, {0.1, 0.1 + 1e-12});
    CHECK(std::isfinite(near.dx));
    CHECK(std::isfinite(near.dy));

    const TangentVector same = distance_gradient({0.1, 0.1}, {0.1, 0.1});
    CHECK(same.dx == 0);
    CHECK(same.dy == 0);
}

TEST_CASE("exp_map examples") {
    CHECK(exp_map({0, 0}, {0, 0}) == PoincarePoint{0, 0});
    const PoincarePoint base{0.3, -0.2};
    CHECK(exp_map(base, {0, 0}) == base);

    const PoincarePoint e = exp_map({0, 0}, {0.5, 0});
    CHECK(e.x == doctest::Approx(0.46211715726000975850).epsilon(1e-14));
    CHECK(e.y == 0);

    // Composing the oracle from its parts: tanh factor then Mobius addition.
    const PoincarePoint moved = exp_map({0.3, 0}, {0.1, 0});
    const double lambda = metric_factor({0.3, 0});
    const PoincarePoint expected = mobius_add({0.3, 0}, {std::tanh(lambda * 0.1 / 2), 0});
    CHECK(moved.x > 0.3);
    CHECK(moved.x < 1);
    CHECK(moved.y == 0);
    CHECK(moved.x == doctest::Approx(expected.x).epsilon(1e-14));
}

TEST_CASE("exp_map at the origin travels 2 artanh(tanh |v|)") {
    for (double len : {0.1, 0.5, 1.0}) {
        for (double angle : {0.0, 1.0, 4.0}) {
            const TangentVector v{len * std::cos(angle), len * std::sin(angle)};
            const double d = hyperbolic_distance({0, 0}, exp_map({0, 0}, v));
            const double t = std::tanh(len);
            CHECK(std::abs(d - std::log((1 + t) / (1 - t))) < 1e-9);
            CHECK(std::abs(d - 2 * std::atanh(t)) < 1e-9);
        }
    }
}

TEST_CASE("exp_map stays inside the disk") {
    const auto pts = testing::random_disk_points(200, 0.999, 14);
    std::mt19937_64 rng(15);
    std::normal_distribution<double> normal(0, 3);
    for (auto p : pts) {
        // Hyperbolic step length of a few units.
        const double scale = (1 - norm2(p.vec())) / 2;
        const PoincarePoint q = exp_map(p, {scale * normal(rng), scale * normal(rng)});
        CHECK(norm2(q.vec()) < 1);
        const PoincarePoint far = exp_map(p, {1e3 * normal(rng), 1e3 * normal(rng)});
        CHECK(norm2(project_to_disk(far.vec()).vec()) < 1);
    }
}

TEST_CASE("mobius_add identities") {
    CHECK(mobius_add({0.3, 0.2}, {0, 0}) == PoincarePoint{0.3, 0.2});
    CHECK(mobius_add({0, 0}, {0.4, -0.1}) == PoincarePoint{0.4, -0.1});

    const PoincarePoint doubled = mobius_add({0.5, 0}, {0.5, 0});
    CHECK(doubled.x == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(doubled.y == 0);
    CHECK(hyperbolic_distance({0, 0}, doubled) == doctest::Approx(2 * hyperbolic_distance({0, 0}, {0.5, 0})).epsilon(1e-13));

    const auto pts = testing::random_disk_points(400, 0.999, 16);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        CHECK(norm(mobius_add(pts[i], pts[i + 1]).vec()) < 1);
    }
}

TEST_CASE("project_to_disk") {
    CHECK(project_to_disk({0.5, 0.5}, 1e-5) == PoincarePoint{0.5, 0.5});
    const PoincarePoint a = project_to_disk({2, 0}, 1e-5);
    CHECK(a.x == doctest::Approx(1 - 1e-5).epsilon(1e-15));
    CHECK(a.y == 0);
    const PoincarePoint b = project_to_disk({0, -1.0}, 1e-5);
    CHECK(b.x == 0);
    CHECK(b.y == doctest::Approx(-(1 - 1e-5)).epsilon(1e-15));
    const PoincarePoint c = project_to_disk({3, 4}, 1e-5);
    CHECK(norm(c.vec()) == doctest::Approx(1 - 1e-5).epsilon(1e-15));
    CHECK(c.y / c.x == doctest::Approx(4.0 / 3).epsilon(1e-14));
}

TEST_CASE("Klein conversions") {
    CHECK(poincare_to_klein({0, 0}) == KleinPoint{0, 0});
    CHECK(klein_to_poincare({0, 0}) == PoincarePoint{0, 0});
    const KleinPoint k = poincare_to_klein({0.5, 0});
    CHECK(k.x == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(k.y == 0);

    const auto pts = testing::random_disk_points(1000, 0.99, 17);
    for (auto p : pts) {
        const PoincarePoint back = klein_to_poincare(poincare_to_klein(p));
        CHECK(std::abs(back.x - p.x) < 1e-12);
        CHECK(std::abs(back.y - p.y) < 1e-12);
    }
    CHECK_THROWS_AS(poincare_to_klein({1, 0}), std::domain_error);
    CHECK_THROWS_AS(klein_to_poincare({0, 1}), std::domain_error);
}

TEST_CASE("einstein_midpoint examples") {
    const std::vector<PoincarePoint> single{{0.3, -0.4}};
    const PoincarePoint m1 = einstein_midpoint(single);
    CHECK(m1.x == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(m1.y == doctest::Approx(-0.4).epsilon(1e-14));

    const std::vector<PoincarePoint> sym{{0.4, 0}, {-0.4, 0}};
    const PoincarePoint m2 = einstein_midpoint(sym);
    CHECK(std::abs(m2.x) < 1e-15);
    CHECK(std::abs(m2.y) < 1e-15);

    // Closed form evaluated directly: Klein points k, gamma = 1 / sqrt(1 - k^2).
    const std::vector<PoincarePoint> pair{{0.2, 0}, {0.6, 0}};
    const double k1 = 2 * 0.2 / (1 + 0.04);
    const double k2 = 2 * 0.6 / (1 + 0.36);
    const double g1 = 1 / std::sqrt(1 - k1 * k1);
    const double g2 = 1 / std::sqrt(1 - k2 * k2);
    const double km = (g1 * k1 + g2 * k2) / (g1 + g2);
    const double expected = km / (1 + std::sqrt(1 - km * km));
    const PoincarePoint m3 = einstein_midpoint(pair);
    CHECK(m3.x == doctest::Approx(expected).epsilon(1e-13));
    CHECK(m3.x > 0.2);
    CHECK(m3.x < 0.6);
    // Weighted toward the higher-gamma point relative to the plain Klein average.
    CHECK(poincare_to_klein(m3).x > (k1 + k2) / 2);

    CHECK_THROWS_AS(einstein_midpoint(std::vector<PoincarePoint>{}), std::invalid_argument);
    const std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(einstein_midpoint(pair, zero), std::invalid_argument);
}

TEST_CASE("einstein_midpoint rolling accumulation equals batch evaluation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pts = testing::random_disk_points(257, 0.98, 100 + seed);
        std::vector<double> w(pts.size());
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 3);
        for (auto& v : w) {
            v = u(rng);
        }

        // Independent batch oracle: direct closed form in Klein coordinates.
        double sg = 0;
        double sx = 0;
        double sy = 0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const KleinPoint k = poincare_to_klein(pts[j]);
            const double g = 1 / std::sqrt(1 - (k.x * k.x + k.y * k.y));
            sg += w[j] * g;
            sx += w[j] * g * k.x;
            sy += w[j] * g * k.y;
        }
        const PoincarePoint batch = klein_to_poincare({sx / sg, sy / sg});

        EinsteinAccumulator first;
        EinsteinAccumulator second;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            (j < 100 ? first : second).add(pts[j], w[j]);
        }
        first.merge(second);
        const PoincarePoint rolling = first.mean();
        CHECK(std::abs(rolling.x - batch.x) < 1e-12);
        CHECK(std::abs(rolling.y - batch.y) < 1e-12);

        const PoincarePoint api = einstein_midpoint(pts, w);
        CHECK(std::abs(api.x - batch.x) < 1e-12);
        CHECK(std::abs(api.y - batch.y) < 1e-12);
    }
}

TEST_CASE("polar coordinates round trip") {
    const auto pts = testing::random_disk_points(500, 0.99, 18);
    for (auto p : pts) {
        const double phi = polar_angle(p);
        CHECK(phi >= 0);
        CHECK(phi < 2 * M_PI);
        const PoincarePoint q = from_polar(hyperbolic_radius(p), phi);
        CHECK(std::abs(q.x - p.x) < 1e-12);
        CHECK(std::abs(q.y - p.y) < 1e-12);
    }
    CHECK(hyperbolic_radius({0.5, 0}) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

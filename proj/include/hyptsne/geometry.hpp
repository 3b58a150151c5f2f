#ifndef HYPTSNE_GEOMETRY_HPP
#define HYPTSNE_GEOMETRY_HPP

#include <cmath>
#include <span>

/**
 * @file geometry.hpp
 *
 * @brief Poincare-disk and Klein-model primitives for two-dimensional hyperbolic space.
 *
 * All points live in the open unit disk. Curvature is fixed at -1.
 */

namespace hyptsne {

struct Vec2 {
    double x = 0;
    double y = 0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/** A point of the Poincare disk; Euclidean norm strictly below 1. */
struct PoincarePoint {
    double x = 0;
    double y = 0;

    constexpr Vec2 vec() const { return {x, y}; }
    static constexpr PoincarePoint from(Vec2 v) { return {v.x, v.y}; }
    friend constexpr bool operator==(PoincarePoint, PoincarePoint) = default;
};

/** A point of the Klein disk; Euclidean norm strictly below 1. */
struct KleinPoint {
    double x = 0;
    double y = 0;

    constexpr Vec2 vec() const { return {x, y}; }
    friend constexpr bool operator==(KleinPoint, KleinPoint) = default;
};

/** Euclidean components of a tangent vector at some base point of the disk. */
struct TangentVector {
    double dx = 0;
    double dy = 0;

    constexpr Vec2 vec() const { return {dx, dy}; }
    static constexpr TangentVector from(Vec2 v) { return {v.x, v.y}; }
    friend constexpr bool operator==(TangentVector, TangentVector) = default;
};

/** Default margin used by `project_to_disk()`. */
inline constexpr double default_projection_epsilon = 1e-5;

/** Lower clamp on sqrt(gamma^2 - 1) in `distance_gradient()`. */
inline constexpr double distance_gradient_floor = 1e-15;

/**
 * Geodesic distance in the Poincare disk,
 * acosh(1 + 2|a-b|^2 / ((1-|a|^2)(1-|b|^2))).
 *
 * Evaluated as log1p(x + sqrt(x(x+2))) to keep precision for nearby points.
 * Throws `std::domain_error` if either point is not strictly inside the disk.
 */
double hyperbolic_distance(PoincarePoint a, PoincarePoint b);

/** Conformal factor 2 / (1 - |p|^2). Throws `std::domain_error` outside the disk. */
double metric_factor(PoincarePoint p);

/**
 * Euclidean gradient of `hyperbolic_distance(yi, yj)` with respect to `yi`.
 *
 * For coincident points the derivative is undefined; the denominator is
 * clamped at `distance_gradient_floor`, which yields the zero vector.
 * Summation loops should skip such pairs instead of relying on this.
 */
TangentVector distance_gradient(PoincarePoint yi, PoincarePoint yj);

/** Mobius addition a (+) b in the unit-curvature gyrovector space. */
PoincarePoint mobius_add(PoincarePoint a, PoincarePoint b);

/**
 * Exponential map at `base`: base (+) tanh(lambda |v| / 2) v / |v|.
 * The zero vector maps to `base`.
 */
PoincarePoint exp_map(PoincarePoint base, TangentVector v);

/** Radially rescale `p` to norm 1 - eps if |p| >= 1; otherwise return it unchanged. */
PoincarePoint project_to_disk(Vec2 p, double eps = default_projection_epsilon);

KleinPoint poincare_to_klein(PoincarePoint p);
PoincarePoint klein_to_poincare(KleinPoint k);

/** Hyperbolic radius d(0, p) = 2 artanh(|p|). */
double hyperbolic_radius(PoincarePoint p);

/** Polar angle of `p` normalized to [0, 2 pi). */
double polar_angle(PoincarePoint p);

/** Poincare point at hyperbolic radius `r` and angle `phi`. */
PoincarePoint from_polar(double r, double phi);

/**
 * Hyperbolic distance between two points given in hyperbolic polar
 * coordinates, via the law of cosines written in sinh^2 form.
 */
double polar_distance(double r1, double phi1, double r2, double phi2);

/**
 * Rolling state for the Einstein midpoint.
 *
 * Points are folded in one at a time; the Lorentz factor of each point is
 * taken in Klein coordinates, gamma = (1 + |p|^2) / (1 - |p|^2) for the
 * Poincare representative p.
 */
class EinsteinAccumulator {
public:
    void add(PoincarePoint p, double weight = 1);

    /** Fold in another accumulator (equivalent to adding all of its points). */
    void merge(const EinsteinAccumulator& other) {
        weighted_gamma_ += other.weighted_gamma_;
        weighted_klein_ += other.weighted_klein_;
    }

    bool empty() const { return weighted_gamma_ == 0; }

    /** Midpoint as a Poincare point. Throws `std::logic_error` when empty. */
    PoincarePoint mean() const;

    double weighted_gamma() const { return weighted_gamma_; }
    Vec2 weighted_klein() const { return weighted_klein_; }

private:
    double weighted_gamma_ = 0;
    Vec2 weighted_klein_;
};

/**
 * Batch Einstein midpoint with non-negative weights.
 * Throws `std::invalid_argument` on empty input, size mismatch or all-zero weights.
 */
PoincarePoint einstein_midpoint(std::span<const PoincarePoint> points, std::span<const double> weights);

/** Unweighted overload. */
PoincarePoint einstein_midpoint(std::span<const PoincarePoint> points);

namespace internal {

/**
 * Distance kernel for hot loops: caller supplies alpha_i = 1 - |yi|^2 and
 * alpha_j = 1 - |yj|^2 and both points are assumed to be interior.
 * Returns x = 2 |yi - yj|^2 / (alpha_i alpha_j), so that d = log1p(x + sqrt(x(x+2))).
 */
inline double distance_argument(Vec2 yi, Vec2 yj, double alpha_i, double alpha_j) {
    return 2 * norm2(yi - yj) / (alpha_i * alpha_j);
}

inline double acosh1p(double x) {
    return std::log1p(x + std::sqrt(x * (x + 2)));
}

/**
 * Distance gradient written as 4 ((yi - yj) + |yi - yj|^2 yi / alpha) / (alpha beta sqrt(x(x+2))),
 * which is algebraically the usual ((|yj|^2 - 2<yi,yj> + 1) yi / alpha - yj) form
 * without the cancellation for nearby points. `x` is `distance_argument()`.
 */
inline Vec2 distance_gradient(Vec2 yi, Vec2 yj, double alpha_i, double alpha_j, double x) {
    const Vec2 diff = yi - yj;
    double root = std::sqrt(x * (x + 2));
    if (root < distance_gradient_floor) {
        root = distance_gradient_floor;
    }
    const double scale = 4 / (alpha_i * alpha_j * root);
    return scale * (diff + (norm2(diff) / alpha_i) * yi);
}

}

}

#endif

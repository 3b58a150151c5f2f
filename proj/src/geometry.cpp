#include "hyptsne/geometry.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace hyptsne {

namespace {

void require_interior(Vec2 p, const char* what) {
    if (!(norm2(p) < 1)) {
        throw std::domain_error(std::string(what) + ": point (" + std::to_string(p.x) + ", "
                                + std::to_string(p.y) + ") is not strictly inside the unit disk");
    }
}

}

double hyperbolic_distance(PoincarePoint a, PoincarePoint b) {
    require_interior(a.vec(), "hyperbolic_distance");
    require_interior(b.vec(), "hyperbolic_distance");
    const double x = internal::distance_argument(a.vec(), b.vec(), 1 - norm2(a.vec()), 1 - norm2(b.vec()));
    return internal::acosh1p(x);
}

double metric_factor(PoincarePoint p) {
    require_interior(p.vec(), "metric_factor");
    return 2 / (1 - norm2(p.vec()));
}

TangentVector distance_gradient(PoincarePoint yi, PoincarePoint yj) {
    require_interior(yi.vec(), "distance_gradient");
    require_interior(yj.vec(), "distance_gradient");
    const double alpha = 1 - norm2(yi.vec());
    const double beta = 1 - norm2(yj.vec());
    const double x = internal::distance_argument(yi.vec(), yj.vec(), alpha, beta);
    return TangentVector::from(internal::distance_gradient(yi.vec(), yj.vec(), alpha, beta, x));
}

PoincarePoint mobius_add(PoincarePoint a, PoincarePoint b) {
    const Vec2 u = a.vec();
    const Vec2 v = b.vec();
    const double uv = dot(u, v);
    const double uu = norm2(u);
    const double vv = norm2(v);
    const double denom = 1 + 2 * uv + uu * vv;
    return PoincarePoint::from(((1 + 2 * uv + vv) / denom) * u + ((1 - uu) / denom) * v);
}

PoincarePoint exp_map(PoincarePoint base, TangentVector v) {
    const double len = norm(v.vec());
    if (len == 0) {
        return base;
    }
    const double lambda = 2 / (1 - norm2(base.vec()));
    const double scale = std::tanh(lambda * len / 2) / len;
    return mobius_add(base, PoincarePoint::from(scale * v.vec()));
}

PoincarePoint project_to_disk(Vec2 p, double eps) {
    const double len = norm(p);
    if (len >= 1) {
        return PoincarePoint::from(((1 - eps) / len) * p);
    }
    return PoincarePoint::from(p);
}

KleinPoint poincare_to_klein(PoincarePoint p) {
    require_interior(p.vec(), "poincare_to_klein");
    const Vec2 k = (2 / (1 + norm2(p.vec()))) * p.vec();
    return {k.x, k.y};
}

PoincarePoint klein_to_poincare(KleinPoint k) {
    require_interior(k.vec(), "klein_to_poincare");
    return PoincarePoint::from((1 / (1 + std::sqrt(1 - norm2(k.vec())))) * k.vec());
}

double hyperbolic_radius(PoincarePoint p) {
    return 2 * std::atanh(norm(p.vec()));
}

double polar_angle(PoincarePoint p) {
    constexpr double two_pi = 2 * std::numbers::pi;
    double phi = std::atan2(p.y, p.x);
    if (phi < 0) {
        phi += two_pi;
    }
    if (phi >= two_pi) {
        phi -= two_pi;
    }
    return phi;
}

PoincarePoint from_polar(double r, double phi) {
    const double len = std::tanh(r / 2);
    return {len * std::cos(phi), len * std::sin(phi)};
}

double polar_distance(double r1, double phi1, double r2, double phi2) {
    const double sr = std::sinh((r1 - r2) / 2);
    const double sp = std::sin((phi1 - phi2) / 2);
    const double u = 2 * sr * sr + 2 * std::sinh(r1) * std::sinh(r2) * sp * sp;
    return internal::acosh1p(u);
}

void EinsteinAccumulator::add(PoincarePoint p, double weight) {
    // gamma of the Klein image 2p/(1+|p|^2), written in Poincare terms.
    const double pp = norm2(p.vec());
    const double gamma = (1 + pp) / (1 - pp);
    const double wg = weight * gamma;
    weighted_gamma_ += wg;
    weighted_klein_ += (wg * 2 / (1 + pp)) * p.vec();
}

PoincarePoint EinsteinAccumulator::mean() const {
    if (weighted_gamma_ <= 0) {
        throw std::logic_error("EinsteinAccumulator::mean: no points accumulated");
    }
    Vec2 k = (1 / weighted_gamma_) * weighted_klein_;
    // A convex combination of interior Klein points stays interior; guard round-off only.
    const double kk = norm2(k);
    if (kk >= 1) {
        k *= (1 - 1e-15) / std::sqrt(kk);
    }
    return PoincarePoint::from((1 / (1 + std::sqrt(1 - norm2(k)))) * k);
}

PoincarePoint einstein_midpoint(std::span<const PoincarePoint> points, std::span<const double> weights) {
    if (points.empty()) {
        throw std::invalid_argument("einstein_midpoint: empty point set");
    }
    if (points.size() != weights.size()) {
        throw std::invalid_argument("einstein_midpoint: points and weights differ in length");
    }
    EinsteinAccumulator acc;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (weights[j] < 0) {
            throw std::invalid_argument("einstein_midpoint: negative weight");
        }
        require_interior(points[j].vec(), "einstein_midpoint");
        acc.add(points[j], weights[j]);
    }
    if (acc.empty()) {
        throw std::invalid_argument("einstein_midpoint: all weights are zero");
    }
    return acc.mean();
}

PoincarePoint einstein_midpoint(std::span<const PoincarePoint> points) {
    if (points.empty()) {
        throw std::invalid_argument("einstein_midpoint: empty point set");
    }
    EinsteinAccumulator acc;
    for (auto p : points) {
        require_interior(p.vec(), "einstein_midpoint");
        acc.add(p);
    }
    return acc.mean();
}

}

#include "hyptsne/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hyptsne {

double radial_split(double min_r, double max_r, SplitRule rule) {
    double mid = (min_r + max_r) / 2;
    if (rule == SplitRule::EqualArea) {
        // (cosh a + cosh b) / 2 = 1 + sinh^2(a/2) + sinh^2(b/2); the sinh form
        // keeps resolution for radii where cosh rounds to 1.
        const double sa = std::sinh(max_r / 2);
        const double sb = std::sinh(min_r / 2);
        mid = internal::acosh1p(sa * sa + sb * sb);
    }
    if (!(mid > min_r && mid < max_r)) {
        mid = min_r + (max_r - min_r) / 2;
    }
    return mid;
}

double cell_size(const PolarCell& cell) {
    const double span = cell.max_phi - cell.min_phi;
    const double diagonal = polar_distance(cell.min_r, cell.min_phi, cell.max_r, cell.max_phi);
    const double outer_arc = span <= std::numbers::pi ? polar_distance(cell.max_r, cell.min_phi, cell.max_r, cell.max_phi)
                                                      : 2 * cell.max_r;
    const double radial = cell.max_r - cell.min_r;
    return std::max({diagonal, outer_arc, radial});
}

PolarQuadtree::PolarQuadtree(std::span<const PoincarePoint> points, SplitRule rule, int max_depth) :
    rule_(rule), max_depth_(max_depth) {
    if (points.empty()) {
        throw std::invalid_argument("PolarQuadtree: no points to insert");
    }
    double outer = 0;
    for (auto p : points) {
        if (!(norm2(p.vec()) < 1)) {
            throw std::domain_error("PolarQuadtree: point outside the open unit disk");
        }
        outer = std::max(outer, hyperbolic_radius(p));
    }
    if (outer <= 0) {
        outer = std::numeric_limits<double>::min();
    }

    // Roughly two nodes per point for well-spread data.
    nodes_.reserve(2 * points.size() + 1);
    QuadNode root;
    root.cell = PolarCell{0, outer, 0, 2 * std::numbers::pi};
    nodes_.push_back(root);

    for (auto p : points) {
        insert(p);
    }

    compact_.resize(nodes_.size());
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        QuadNode& node = nodes_[id];
        node.size = cell_size(node.cell);
        CompactNode& c = compact_[id];
        c.count = node.count;
        c.first_child = node.first_child;
        if (node.count > 0) {
            node.midpoint = node.accumulator.mean();
            c.midpoint = node.midpoint.vec();
            c.alpha = 1 - norm2(c.midpoint);
        }
    }
}

std::size_t PolarQuadtree::child_for(const QuadNode& node, double r, double phi) const {
    const std::size_t angular = phi >= node.cell.mid_phi() ? 2 : 0;
    const std::size_t radial = r >= node.mid_r ? 1 : 0;
    return static_cast<std::size_t>(node.first_child) + angular + radial;
}

void PolarQuadtree::subdivide(std::size_t id) {
    const PolarCell parent = nodes_[id].cell;
    const double mid_r = radial_split(parent.min_r, parent.max_r, rule_);
    const double mid_phi = parent.mid_phi();
    const auto depth = static_cast<std::uint16_t>(nodes_[id].depth + 1);

    const auto first = static_cast<std::int32_t>(nodes_.size());
    const PolarCell cells[4] = {
        {parent.min_r, mid_r, parent.min_phi, mid_phi},
        {mid_r, parent.max_r, parent.min_phi, mid_phi},
        {parent.min_r, mid_r, mid_phi, parent.max_phi},
        {mid_r, parent.max_r, mid_phi, parent.max_phi},
    };
    for (const auto& cell : cells) {
        QuadNode child;
        child.cell = cell;
        child.depth = depth;
        nodes_.push_back(child);
    }

    QuadNode& node = nodes_[id];
    node.first_child = first;
    node.mid_r = mid_r;
    if (node.point_count > 0) {
        const std::size_t target = child_for(node, hyperbolic_radius(node.point), polar_angle(node.point));
        QuadNode& child = nodes_[target];
        child.point = node.point;
        child.point_count = node.point_count;
        child.count = node.point_count;
        // The leaf held only this location, so its accumulator moves with it.
        child.accumulator = node.accumulator;
        node.point_count = 0;
        node.point = {};
    }
}

void PolarQuadtree::insert(PoincarePoint p) {
    const double r = hyperbolic_radius(p);
    const double phi = polar_angle(p);
    std::size_t id = 0;
    while (true) {
        if (nodes_[id].is_leaf()) {
            QuadNode& leaf = nodes_[id];
            if (leaf.count == 0) {
                leaf.point = p;
                leaf.point_count = 1;
                leaf.count = 1;
                leaf.accumulator.add(p);
                return;
            }
            if (leaf.point_count > 0 && leaf.point == p) {
                ++leaf.point_count;
                ++leaf.count;
                leaf.accumulator.add(p);
                return;
            }
            if (leaf.depth >= max_depth_) {
                if (leaf.overflow < 0) {
                    leaf.overflow = static_cast<std::int32_t>(overflow_.size());
                    overflow_.emplace_back();
                }
                auto& bucket = overflow_[static_cast<std::size_t>(leaf.overflow)];
                auto same = std::find_if(bucket.begin(), bucket.end(), [&](const OverflowEntry& e) { return e.point == p; });
                if (same != bucket.end()) {
                    ++same->count;
                } else {
                    bucket.push_back({p, 1});
                }
                ++leaf.count;
                leaf.accumulator.add(p);
                return;
            }
            subdivide(id);
        }
        QuadNode& node = nodes_[id];
        ++node.count;
        node.accumulator.add(p);
        id = child_for(node, r, phi);
    }
}

std::vector<double> PolarQuadtree::criterion(double theta) const {
    if (!(theta >= 0)) {
        throw std::invalid_argument("PolarQuadtree: theta must be non-negative");
    }
    std::vector<double> out(nodes_.size(), std::numeric_limits<double>::infinity());
    if (theta > 0) {
        for (std::size_t id = 0; id < nodes_.size(); ++id) {
            const double s = std::sinh(nodes_[id].size / (2 * theta));
            out[id] = 2 * s * s;
        }
    }
    return out;
}

std::size_t PolarQuadtree::locate(PoincarePoint p) const {
    const double r = hyperbolic_radius(p);
    const double phi = polar_angle(p);
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        id = child_for(nodes_[id], r, phi);
    }
    return id;
}

}

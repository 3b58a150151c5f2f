#ifndef HYPTSNE_QUADTREE_HPP
#define HYPTSNE_QUADTREE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geometry.hpp"

/**
 * @file quadtree.hpp
 *
 * @brief Polar quadtree over the Poincare disk for far-field summation.
 *
 * Cells are annulus sectors [min_r, max_r] x [min_phi, max_phi] in hyperbolic
 * polar coordinates. The root is the full disk of radius equal to the farthest
 * inserted point. Every split halves the angular range; the radial split point
 * depends on the `SplitRule`. Each node keeps its point count and a rolling
 * Einstein-midpoint accumulator that is updated on the insertion path.
 */

namespace hyptsne {

enum class SplitRule {
    /** Children of equal hyperbolic area: mid_r = acosh((cosh max_r + cosh min_r) / 2). */
    EqualArea,
    /** Children of equal radial extent: mid_r = (max_r + min_r) / 2. */
    EqualLength
};

/** Radial split point of [min_r, max_r] under `rule`; always strictly inside the interval. */
double radial_split(double min_r, double max_r, SplitRule rule);

struct PolarCell {
    double min_r = 0;
    double max_r = 0;
    double min_phi = 0;
    double max_phi = 0;

    double mid_phi() const { return (min_phi + max_phi) / 2; }
    bool contains(double r, double phi) const {
        return r >= min_r && r <= max_r && phi >= min_phi && phi <= max_phi;
    }
};

/**
 * Longest hyperbolic distance inside `cell`, taken as the largest of the
 * diagonal, the outer-arc chord and the radial edge. For angular spans above
 * pi the outer-arc candidate uses the antipodal chord of length 2 max_r.
 */
double cell_size(const PolarCell& cell);

struct QuadNode {
    PolarCell cell;
    /** Points inside the cell, duplicates included. */
    std::uint32_t count = 0;
    EinsteinAccumulator accumulator;
    /** Finalized Einstein midpoint; valid once `count > 0`. */
    PoincarePoint midpoint;
    /** Finalized `cell_size(cell)`. */
    double size = 0;
    /** Index of the first of four consecutive children, or -1 for leaves. */
    std::int32_t first_child = -1;
    /** Radial split point used for the children; set on subdivision. */
    double mid_r = 0;
    std::uint16_t depth = 0;
    /** Leaf payload: one location with its multiplicity. */
    PoincarePoint point;
    std::uint32_t point_count = 0;
    /** Extra distinct locations in leaves pinned at the maximum depth, or -1. */
    std::int32_t overflow = -1;

    bool is_leaf() const { return first_child < 0; }
};

/** One contribution produced by `PolarQuadtree::traverse()`. */
struct FarFieldVisit {
    /** Number of points represented. */
    std::uint32_t count;
    /** Their location (leaf) or their Einstein midpoint (summary). */
    PoincarePoint point;
    bool summary;
};

struct TraversalStats {
    std::size_t leaf_visits = 0;
    std::size_t summary_visits = 0;
    std::size_t nodes_opened = 0;

    std::size_t visits() const { return leaf_visits + summary_visits; }
    TraversalStats& operator+=(const TraversalStats& o) {
        leaf_visits += o.leaf_visits;
        summary_visits += o.summary_visits;
        nodes_opened += o.nodes_opened;
        return *this;
    }
};

class PolarQuadtree {
public:
    static constexpr int default_max_depth = 50;

    /**
     * Insert every point of `points`. Throws `std::domain_error` if a point is
     * not strictly inside the disk and `std::invalid_argument` on empty input.
     */
    PolarQuadtree(std::span<const PoincarePoint> points, SplitRule rule, int max_depth = default_max_depth);

    SplitRule rule() const { return rule_; }
    std::size_t size() const { return nodes_.empty() ? 0 : nodes_.front().count; }
    const std::vector<QuadNode>& nodes() const { return nodes_; }
    const QuadNode& root() const { return nodes_.front(); }

    /** Leaf locations of a node, including max-depth overflow entries. */
    template<typename Function_>
    void for_each_leaf_entry(const QuadNode& leaf, Function_ fun) const {
        if (leaf.point_count > 0) {
            fun(leaf.point, leaf.point_count);
        }
        if (leaf.overflow >= 0) {
            for (const auto& e : overflow_[static_cast<std::size_t>(leaf.overflow)]) {
                fun(e.point, e.count);
            }
        }
    }

    /** Leaf index reached by descending with the polar coordinates of `p`. */
    std::size_t locate(PoincarePoint p) const;

    /**
     * Per-node acceptance thresholds for one theta. The test size < theta * d
     * is evaluated as x > 2 sinh^2(size / (2 theta)), where x is the distance
     * argument with d = acosh(1 + x); this avoids a log and a square root per
     * node. Theta 0 gives infinite thresholds.
     */
    std::vector<double> criterion(double theta) const;

    /**
     * Depth-first far-field traversal for `query`.
     *
     * At an internal node whose midpoint differs from `query`, the subtree is
     * summarized by (count, midpoint) when size < theta * d(query, midpoint).
     * Leaves always produce exact visits. With `exclude_self`, one point at
     * the query location is dropped from the leaf holding it. `thresholds`
     * must come from `criterion(theta)`.
     */
    template<typename Visitor_>
    TraversalStats traverse(PoincarePoint query, std::span<const double> thresholds, Visitor_&& visitor,
                            bool exclude_self = true) const {
        TraversalStats stats;
        const Vec2 q = query.vec();
        const double alpha_q = 1 - norm2(q);
        visit(0, query, q, alpha_q, thresholds, visitor, exclude_self, stats);
        return stats;
    }

    /** As above, computing the thresholds for this call only. */
    template<typename Visitor_>
    TraversalStats traverse(PoincarePoint query, double theta, Visitor_&& visitor, bool exclude_self = true) const {
        const auto thresholds = criterion(theta);
        return traverse(query, std::span<const double>(thresholds), visitor, exclude_self);
    }

private:
    struct OverflowEntry {
        PoincarePoint point;
        std::uint32_t count;
    };

    void insert(PoincarePoint p);
    void subdivide(std::size_t node);
    std::size_t child_for(const QuadNode& node, double r, double phi) const;

    template<typename Visitor_>
    void visit(std::size_t id, PoincarePoint query, Vec2 q, double alpha_q, std::span<const double> thresholds,
               Visitor_& visitor, bool& exclude_self, TraversalStats& stats) const {
        const CompactNode& node = compact_[id];
        if (node.count == 0) {
            return;
        }
        if (node.first_child < 0) {
            for_each_leaf_entry(nodes_[id], [&](PoincarePoint p, std::uint32_t count) {
                if (exclude_self && p == query) {
                    exclude_self = false;
                    --count;
                }
                if (count > 0) {
                    ++stats.leaf_visits;
                    visitor(FarFieldVisit{count, p, false});
                }
            });
            return;
        }
        if (node.midpoint != q) {
            if (internal::distance_argument(q, node.midpoint, alpha_q, node.alpha) > thresholds[id]) {
                ++stats.summary_visits;
                visitor(FarFieldVisit{node.count, PoincarePoint::from(node.midpoint), true});
                return;
            }
        }
        ++stats.nodes_opened;
        for (std::int32_t c = 0; c < 4; ++c) {
            visit(static_cast<std::size_t>(node.first_child + c), query, q, alpha_q, thresholds, visitor, exclude_self,
                  stats);
        }
    }

    SplitRule rule_;
    int max_depth_;
    std::vector<QuadNode> nodes_;
    std::vector<std::vector<OverflowEntry>> overflow_;
    /** The fields the traversal reads, packed per node. */
    struct CompactNode {
        Vec2 midpoint;
        double alpha = 1;
        std::uint32_t count = 0;
        std::int32_t first_child = -1;
    };
    std::vector<CompactNode> compact_;
};

}

#endif

#ifndef HYPTSNE_SYNTHETIC_HPP
#define HYPTSNE_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "dataset_io.hpp"

namespace hyptsne {

struct MixtureOptions {
    std::size_t n = 3000;
    std::size_t classes = 3;
    std::size_t dims = 50;
    /** Distance between each class center and the origin, in units of the within-class standard deviation. */
    double separation = 10;
    std::uint64_t seed = 1;
};

/** Isotropic unit-variance Gaussian classes; point i has label i % classes. */
Dataset gaussian_mixture(const MixtureOptions& options);

struct HierarchyOptions {
    std::size_t n = 5000;
    /** Levels below the root; there are branching^depth leaf clusters. */
    std::size_t depth = 3;
    std::size_t branching = 4;
    std::size_t dims = 50;
    /** Standard deviation of the first-level offsets. */
    double spread = 20;
    /** Factor applied to the offset scale at each deeper level. */
    double decay = 0.35;
    /** Within-leaf standard deviation. */
    double noise = 1;
    std::uint64_t seed = 1;
};

/**
 * Tree-structured clusters: every node offsets its children by Gaussian
 * vectors whose scale shrinks with depth. Point i belongs to leaf
 * i % leaves and is labeled with its first-level branch.
 */
Dataset hierarchical_clusters(const HierarchyOptions& options);

}

#endif

#ifndef HYPTSNE_SVG_HPP
#define HYPTSNE_SVG_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace hyptsne {

struct SvgOptions {
    /** Canvas width and height in pixels. */
    int pixels = 800;
    /** Dot radius in pixels, independent of position. */
    double dot_radius = 2;
};

/**
 * Scatter plot over the viewport [-1.05, 1.05]^2 with the unit circle drawn.
 * Points are colored by label from a 10-color palette (cycled); without labels
 * all points share the first color. The output depends only on the inputs.
 */
std::string render_svg(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels,
                       const SvgOptions& options = {});

/** Throws `std::runtime_error` if `path` cannot be written. */
void emit_svg(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels,
              const std::string& path, const SvgOptions& options = {});

}

#endif

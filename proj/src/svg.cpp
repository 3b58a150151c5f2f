#include "hyptsne/svg.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

#include "hyptsne/atomic_file.hpp"

namespace hyptsne {

namespace {

constexpr double half_extent = 1.05;

constexpr std::array<const char*, 10> palette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
};

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}

std::string render_svg(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels,
                       const SvgOptions& options) {
    if (labels && labels->size() != embedding.size()) {
        throw std::invalid_argument("render_svg: label count does not match point count");
    }
    if (options.pixels <= 0 || !(options.dot_radius > 0)) {
        throw std::invalid_argument("render_svg: canvas size and dot radius must be positive");
    }
    const double px = options.pixels;
    const double scale = px / (2 * half_extent);
    auto to_x = [&](double x) { return (x + half_extent) * scale; };
    auto to_y = [&](double y) { return (half_extent - y) * scale; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.pixels) + "\" height=\""
           + std::to_string(options.pixels) + "\" viewBox=\"0 0 " + std::to_string(options.pixels) + " "
           + std::to_string(options.pixels) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<circle cx=\"" + fixed(to_x(0)) + "\" cy=\"" + fixed(to_y(0)) + "\" r=\"" + fixed(scale)
           + "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<g stroke=\"none\">\n";
    const std::string r = fixed(options.dot_radius);
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        std::size_t color = 0;
        if (labels) {
            const std::int64_t label = (*labels)[i];
            const auto m = static_cast<std::int64_t>(palette.size());
            color = static_cast<std::size_t>(((label % m) + m) % m);
        }
        out += "<circle cx=\"" + fixed(to_x(embedding[i].x)) + "\" cy=\"" + fixed(to_y(embedding[i].y)) + "\" r=\"" + r
               + "\" fill=\"" + palette[color] + "\"/>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

void emit_svg(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels,
              const std::string& path, const SvgOptions& options) {
    write_file_atomic(path, render_svg(embedding, labels, options));
}

}

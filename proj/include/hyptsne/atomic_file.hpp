#ifndef HYPTSNE_ATOMIC_FILE_HPP
#define HYPTSNE_ATOMIC_FILE_HPP

#include <string>
#include <string_view>

namespace hyptsne {

/**
 * Write `contents` to `<path>.tmp` and rename it over `path`.
 * Throws `std::runtime_error` naming the path if either step fails.
 */
void write_file_atomic(const std::string& path, std::string_view contents);

}

#endif

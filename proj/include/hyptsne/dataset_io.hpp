#ifndef HYPTSNE_DATASET_IO_HPP
#define HYPTSNE_DATASET_IO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "data_matrix.hpp"

/**
 * @file dataset_io.hpp
 *
 * @brief Loading and saving input matrices.
 *
 * CSV files start with a header row; a column named `label` holds integer
 * class labels and every other column is a feature. Binary files hold a
 * 16-byte header (magic "HTSN", u32 n, u32 d, u32 reserved = 0, all little
 * endian) followed by n * d little-endian doubles in row-major order. Labels
 * for a binary file live next to it in `<path>.labels` as n little-endian u32.
 */

namespace hyptsne {

struct Dataset {
    DataMatrix data;
    std::optional<std::vector<std::int64_t>> labels;
};

enum class DatasetFormat { Auto, Csv, Binary };

/** Parses "auto", "csv" or "binary"; throws `std::invalid_argument` otherwise. */
DatasetFormat parse_format(const std::string& name);
const char* to_string(DatasetFormat format);

/** `format` itself unless Auto, which picks CSV for a `.csv` extension and binary otherwise. */
DatasetFormat resolve_format(const std::string& path, DatasetFormat format);

/** Malformed input. The message names the file and the line or byte offset. */
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * `Auto` picks CSV for a `.csv` extension and binary otherwise. The matrix is
 * validated (finite, at least two rows) before returning.
 */
Dataset load_dataset(const std::string& path, DatasetFormat format = DatasetFormat::Auto);

Dataset load_csv(const std::string& path);
Dataset load_binary(const std::string& path);

/** Values are written with 17 significant digits so that loading is exact. */
void save_csv(const Dataset& dataset, const std::string& path);

/** Also writes `<path>.labels` when labels are present. */
void save_binary(const Dataset& dataset, const std::string& path);

inline constexpr char binary_magic[4] = {'H', 'T', 'S', 'N'};
inline constexpr std::size_t binary_header_bytes = 16;

}

#endif

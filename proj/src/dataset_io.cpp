#include "hyptsne/dataset_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "hyptsne/atomic_file.hpp"

namespace hyptsne {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line, const std::string& what) {
    throw ParseError(path + ": line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_offset(const std::string& path, std::size_t offset, const std::string& what) {
    throw ParseError(path + ": byte offset " + std::to_string(offset) + ": " + what);
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint32_t read_u32(const std::string& bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) {
        v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(b)]);
    }
    return v;
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
    }
}

static_assert(sizeof(double) == 8 && sizeof(std::uint64_t) == 8);

double read_f64(const std::string& bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) {
        v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(b)]);
    }
    double out;
    std::memcpy(&out, &v, sizeof(out));
    return out;
}

void append_f64(std::string& out, double value) {
    std::uint64_t v;
    std::memcpy(&v, &value, sizeof(v));
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
    }
}

void check_finite(const DataMatrix& data, const std::string& path) {
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

}

DatasetFormat parse_format(const std::string& name) {
    if (name == "auto") {
        return DatasetFormat::Auto;
    }
    if (name == "csv") {
        return DatasetFormat::Csv;
    }
    if (name == "binary") {
        return DatasetFormat::Binary;
    }
    throw std::invalid_argument("unknown dataset format '" + name + "' (expected auto, csv or binary)");
}

const char* to_string(DatasetFormat format) {
    switch (format) {
    case DatasetFormat::Auto:
        return "auto";
    case DatasetFormat::Csv:
        return "csv";
    case DatasetFormat::Binary:
        return "binary";
    }
    return "auto";
}

DatasetFormat resolve_format(const std::string& path, DatasetFormat format) {
    if (format != DatasetFormat::Auto) {
        return format;
    }
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    return csv ? DatasetFormat::Csv : DatasetFormat::Binary;
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
    return resolve_format(path, format) == DatasetFormat::Csv ? load_csv(path) : load_binary(path);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    std::optional<std::size_t> label_column;
    std::size_t columns = 0;
    std::string header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = line;
            break;
        }
    }
    if (header.empty()) {
        fail_line(path, line_no == 0 ? 1 : line_no, "missing header row");
    }
    fields = split_fields(header);
    columns = fields.size();
    for (std::size_t c = 0; c < columns; ++c) {
        if (fields[c] == "label") {
            if (label_column) {
                fail_line(path, line_no, "duplicate 'label' column");
            }
            label_column = c;
        }
    }
    const std::size_t features = columns - (label_column ? 1 : 0);
    if (features == 0) {
        fail_line(path, line_no, "no feature columns");
    }

    std::vector<double> values;
    std::vector<std::int64_t> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        fields = split_fields(line);
        if (fields.size() != columns) {
            fail_line(path, line_no, "expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < columns; ++c) {
            const std::string_view f = fields[c];
            const char* end = f.data() + f.size();
            if (label_column && c == *label_column) {
                std::int64_t label = 0;
                const auto res = std::from_chars(f.data(), end, label);
                if (res.ec != std::errc() || res.ptr != end) {
                    fail_line(path, line_no, "column " + std::to_string(c + 1) + ": invalid label '" + std::string(f) + "'");
                }
                labels.push_back(label);
            } else {
                double v = 0;
                const auto res = std::from_chars(f.data(), end, v);
                if (res.ec != std::errc() || res.ptr != end || f.empty()) {
                    fail_line(path, line_no, "column " + std::to_string(c + 1) + ": invalid number '" + std::string(f) + "'");
                }
                if (!std::isfinite(v)) {
                    fail_line(path, line_no, "column " + std::to_string(c + 1) + ": non-finite value");
                }
                values.push_back(v);
            }
        }
        ++rows;
    }

    Dataset out{DataMatrix(rows, features, std::move(values)), std::nullopt};
    if (label_column) {
        out.labels = std::move(labels);
    }
    check_finite(out.data, path);
    return out;
}

Dataset load_binary(const std::string& path) {
    const std::string bytes = read_all(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), binary_magic, 4) != 0) {
        fail_offset(path, 0, "bad magic (expected \"HTSN\")");
    }
    if (bytes.size() < binary_header_bytes) {
        fail_offset(path, bytes.size(), "truncated header (" + std::to_string(bytes.size()) + " of 16 bytes)");
    }
    const std::uint32_t n = read_u32(bytes, 4);
    const std::uint32_t d = read_u32(bytes, 8);
    if (read_u32(bytes, 12) != 0) {
        fail_offset(path, 12, "reserved header field must be zero");
    }
    if (d == 0) {
        fail_offset(path, 8, "zero columns");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(n) * d;
    const std::uint64_t expected = binary_header_bytes + 8 * count;
    if (bytes.size() != expected) {
        fail_offset(path, std::min<std::uint64_t>(bytes.size(), expected),
                    "payload of " + std::to_string(bytes.size() - binary_header_bytes) + " bytes, expected "
                        + std::to_string(8 * count) + " for " + std::to_string(n) + " x " + std::to_string(d));
    }

    std::vector<double> values(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::size_t offset = binary_header_bytes + 8 * k;
        values[k] = read_f64(bytes, offset);
        if (!std::isfinite(values[k])) {
            fail_offset(path, offset, "non-finite value at row " + std::to_string(k / d) + ", column " + std::to_string(k % d));
        }
    }

    Dataset out{DataMatrix(n, d, std::move(values)), std::nullopt};
    const std::string label_path = path + ".labels";
    std::ifstream probe(label_path, std::ios::binary);
    if (probe) {
        probe.close();
        const std::string raw = read_all(label_path);
        if (raw.size() != 4 * static_cast<std::size_t>(n)) {
            fail_offset(label_path, std::min<std::size_t>(raw.size(), 4 * static_cast<std::size_t>(n)),
                        "expected " + std::to_string(n) + " u32 labels, found " + std::to_string(raw.size()) + " bytes");
        }
        std::vector<std::int64_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = read_u32(raw, 4 * i);
        }
        out.labels = std::move(labels);
    }
    check_finite(out.data, path);
    return out;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    const DataMatrix& m = dataset.data;
    if (dataset.labels && dataset.labels->size() != m.rows()) {
        throw std::invalid_argument("save_csv: label count does not match row count");
    }
    std::string out;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        out += (c ? ",x" : "x") + std::to_string(c);
    }
    if (dataset.labels) {
        out += ",label";
    }
    out += '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) {
                out += ',';
            }
            out += format_double(m(i, c));
        }
        if (dataset.labels) {
            out += ',' + std::to_string((*dataset.labels)[i]);
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void save_binary(const Dataset& dataset, const std::string& path) {
    const DataMatrix& m = dataset.data;
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
        throw std::invalid_argument("save_binary: matrix too large for a u32 header");
    }
    std::string out(binary_magic, 4);
    append_u32(out, static_cast<std::uint32_t>(m.rows()));
    append_u32(out, static_cast<std::uint32_t>(m.cols()));
    append_u32(out, 0);
    out.reserve(binary_header_bytes + 8 * m.values().size());
    for (double v : m.values()) {
        append_f64(out, v);
    }
    write_file_atomic(path, out);

    if (dataset.labels) {
        if (dataset.labels->size() != m.rows()) {
            throw std::invalid_argument("save_binary: label count does not match row count");
        }
        std::string raw;
        for (std::int64_t label : *dataset.labels) {
            if (label < 0 || label > static_cast<std::int64_t>(UINT32_MAX)) {
                throw std::invalid_argument("save_binary: label " + std::to_string(label) + " does not fit in u32");
            }
            append_u32(raw, static_cast<std::uint32_t>(label));
        }
        write_file_atomic(path + ".labels", raw);
    }
}

}

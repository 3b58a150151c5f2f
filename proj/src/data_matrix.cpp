#include "hyptsne/data_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyptsne {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values) :
    rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("DataMatrix: expected " + std::to_string(rows_ * cols_) + " values, got "
                                    + std::to_string(values_.size()));
    }
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const {
    DataMatrix out(indices.size(), cols_);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        auto src = row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

void DataMatrix::validate() const {
    if (rows_ < 2) {
        throw std::invalid_argument("DataMatrix: need at least two rows, got " + std::to_string(rows_));
    }
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
        if (!std::isfinite(values_[idx])) {
            throw std::invalid_argument("DataMatrix: non-finite value at row " + std::to_string(idx / cols_)
                                        + ", column " + std::to_string(idx % cols_));
        }
    }
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double out = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        out += diff * diff;
    }
    return out;
}

}

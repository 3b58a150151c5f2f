#ifndef HYPTSNE_DATA_MATRIX_HPP
#define HYPTSNE_DATA_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace hyptsne {

/** Dense row-major matrix; each row is one observation. */
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols);
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const std::vector<double>& values() const { return values_; }

    /** Rows selected by `indices`, in that order. */
    DataMatrix select_rows(std::span<const std::size_t> indices) const;

    /** Throws `std::invalid_argument` on NaN/Inf entries or fewer than two rows. */
    void validate() const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

double squared_euclidean(std::span<const double> a, std::span<const double> b);

}

#endif

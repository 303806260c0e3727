#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pexp/errors.hpp"

namespace pexp {

// Dense row-major matrix. Rows index regions, columns index time periods, so
// estimator loops run with the period index innermost.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void require_shape(std::size_t rows, std::size_t cols, const std::string& what) const {
        if (rows_ != rows || cols_ != cols) {
            throw input_error(what + ": expected " + std::to_string(rows) + "x" +
                              std::to_string(cols) + ", got " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
        }
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.values_ == b.values_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// N x S x T tensor, region-major then sector then period.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t n1, std::size_t n2, std::size_t n3, double fill = 0.0)
        : n1_(n1), n2_(n2), n3_(n3), values_(n1 * n2 * n3, fill) {}

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return values_[(i * n2_ + j) * n3_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * n2_ + j) * n3_ + k];
    }

    std::size_t dim1() const { return n1_; }
    std::size_t dim2() const { return n2_; }
    std::size_t dim3() const { return n3_; }
    bool empty() const { return values_.empty(); }

private:
    std::size_t n1_ = 0, n2_ = 0, n3_ = 0;
    std::vector<double> values_;
};

// Kahan compensated accumulator. Summation order is fixed by the caller, which
// keeps every estimator bit-stable across runs and thread counts.
class KahanSum {
public:
    void add(double x) {
        double y = x - compensation_;
        double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace pexp

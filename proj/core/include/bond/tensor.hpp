#pragma once

#include "bond/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace bond {

/// Dense row-major matrix of doubles; the only numeric container in the
/// library. A 1xN tensor doubles as a row vector.
class Tensor2 {
  public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);

    /// Builds from external values and rejects NaN/Inf entries.
    static Tensor2 from_data(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor2 identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    bool same_shape(const Tensor2& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    /// True when every entry is finite.
    bool all_finite() const;

    // In-place arithmetic; shapes must match.
    Tensor2& operator+=(const Tensor2& other);
    Tensor2& operator-=(const Tensor2& other);
    Tensor2& operator*=(double s);
    void fill(double value);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// -- products -------------------------------------------------------------

/// Standard matrix product, shape (a.rows, b.cols).
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
/// a * b^T without materializing the transpose.
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
/// a^T * b without materializing the transpose.
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
Tensor2 transpose(const Tensor2& a);

// -- elementwise ----------------------------------------------------------

Tensor2 add(const Tensor2& a, const Tensor2& b);
Tensor2 sub(const Tensor2& a, const Tensor2& b);
Tensor2 mul(const Tensor2& a, const Tensor2& b);
/// Elementwise division; any zero divisor raises parameter_error.
Tensor2 div(const Tensor2& a, const Tensor2& b);
Tensor2 scale(const Tensor2& a, double s);
Tensor2 tanh(const Tensor2& a);
Tensor2 relu(const Tensor2& a);
Tensor2 abs(const Tensor2& a);
Tensor2 sqrt(const Tensor2& a);
Tensor2 max(const Tensor2& a, const Tensor2& b);
Tensor2 max(const Tensor2& a, double s);

// -- reductions -----------------------------------------------------------

/// Population variance over all entries.
double variance(const Tensor2& t);
double mean(const Tensor2& t);
double max_abs(const Tensor2& t);
/// Euclidean norm of each row, returned as a rows x 1 tensor.
Tensor2 row_norms(const Tensor2& t);
/// Mean over rows, returned as a 1 x cols tensor.
Tensor2 col_mean(const Tensor2& t);
/// Sum over rows, returned as a 1 x cols tensor.
Tensor2 col_sum(const Tensor2& t);

// -- sampling -------------------------------------------------------------

/// Entry (i,j) ~ U[lo(i,j), hi(i,j)); lo and hi must share a shape and
/// satisfy lo <= hi everywhere.
Tensor2 sample_uniform(Rng& rng, const Tensor2& lo, const Tensor2& hi);
/// I.i.d. normal entries; std must be >= 0.
Tensor2 sample_normal(Rng& rng, double mean, double std, std::size_t rows, std::size_t cols);
/// Entries in {+1, -1} with equal probability.
Tensor2 sample_sign(Rng& rng, std::size_t rows, std::size_t cols);

// -- misc -----------------------------------------------------------------

/// FNV-1a over the raw byte representation; used for frozen-parameter checks.
std::uint64_t fnv1a_hash(std::span<const double> values, std::uint64_t h = 0xcbf29ce484222325ULL);

} // namespace bond

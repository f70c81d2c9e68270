#include "bond/tensor.hpp"

#include "bond/errors.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace bond {

namespace {

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
    if (!a.same_shape(b)) {
        throw dimension_error(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) +
                              "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                              "x" + std::to_string(b.cols()) + ")");
    }
}

template <typename F>
Tensor2 map(const Tensor2& a, F f) {
    Tensor2 out(a.rows(), a.cols());
    auto src = a.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

template <typename F>
Tensor2 zip(const Tensor2& a, const Tensor2& b, F f, const char* op) {
    require_same_shape(a, b, op);
    Tensor2 out(a.rows(), a.cols());
    auto sa = a.data();
    auto sb = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < sa.size(); ++i) dst[i] = f(sa[i], sb[i]);
    return out;
}

} // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2 Tensor2::from_data(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
        throw dimension_error("from_data: " + std::to_string(values.size()) +
                              " values for shape " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw parameter_error("from_data: non-finite entry");
    }
    Tensor2 t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = std::move(values);
    return t;
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw dimension_error("from_rows: ragged rows");
        values.insert(values.end(), row.begin(), row.end());
    }
    return from_data(r, c, std::move(values));
}

Tensor2 Tensor2::identity(std::size_t n) {
    Tensor2 t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

bool Tensor2::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor2& Tensor2::operator+=(const Tensor2& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor2& Tensor2::operator-=(const Tensor2& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor2& Tensor2::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void Tensor2::fill(double value) {
    for (double& v : data_) v = value;
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols() != b.rows()) {
        throw dimension_error("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.rows()));
    }
    Tensor2 out(a.rows(), b.cols());
    const std::size_t n = a.cols();
    const std::size_t m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double s = arow[k];
            if (s == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < m; ++j) orow[j] += s * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols() != b.cols()) {
        throw dimension_error("matmul_nt: inner dimensions " + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.cols()));
    }
    Tensor2 out(a.rows(), b.rows());
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    if (a.rows() != b.rows()) {
        throw dimension_error("matmul_tn: inner dimensions " + std::to_string(a.rows()) + " vs " +
                              std::to_string(b.rows()));
    }
    Tensor2 out(a.cols(), b.cols());
    const std::size_t m = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.row_ptr(k);
        const double* brow = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double s = arow[i];
            if (s == 0.0) continue;
            double* orow = out.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) orow[j] += s * brow[j];
        }
    }
    return out;
}

Tensor2 transpose(const Tensor2& a) {
    Tensor2 out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor2 sub(const Tensor2& a, const Tensor2& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor2 mul(const Tensor2& a, const Tensor2& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor2 div(const Tensor2& a, const Tensor2& b) {
    return zip(a, b,
               [](double x, double y) {
                   if (y == 0.0) throw parameter_error("div: zero divisor");
                   return x / y;
               },
               "div");
}

Tensor2 scale(const Tensor2& a, double s) {
    return map(a, [s](double x) { return x * s; });
}

Tensor2 tanh(const Tensor2& a) {
    return map(a, [](double x) { return std::tanh(x); });
}

Tensor2 relu(const Tensor2& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor2 abs(const Tensor2& a) {
    return map(a, [](double x) { return std::fabs(x); });
}

Tensor2 sqrt(const Tensor2& a) {
    return map(a, [](double x) {
        if (x < 0.0) throw parameter_error("sqrt: negative entry");
        return std::sqrt(x);
    });
}

Tensor2 max(const Tensor2& a, const Tensor2& b) {
    return zip(a, b, [](double x, double y) { return x > y ? x : y; }, "max");
}

Tensor2 max(const Tensor2& a, double s) {
    return map(a, [s](double x) { return x > s ? x : s; });
}

double variance(const Tensor2& t) {
    // Welford's online algorithm; population variance.
    if (t.size() == 0) throw parameter_error("variance: empty tensor");
    double m = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : t.data()) {
        ++n;
        const double d = v - m;
        m += d / static_cast<double>(n);
        m2 += d * (v - m);
    }
    return m2 / static_cast<double>(n);
}

double mean(const Tensor2& t) {
    if (t.size() == 0) throw parameter_error("mean: empty tensor");
    double acc = 0.0;
    for (double v : t.data()) acc += v;
    return acc / static_cast<double>(t.size());
}

double max_abs(const Tensor2& t) {
    double m = 0.0;
    for (double v : t.data()) {
        const double a = std::fabs(v);
        if (a > m) m = a;
    }
    return m;
}

Tensor2 row_norms(const Tensor2& t) {
    Tensor2 out(t.rows(), 1);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double* row = t.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < t.cols(); ++j) acc += row[j] * row[j];
        out(i, 0) = std::sqrt(acc);
    }
    return out;
}

Tensor2 col_mean(const Tensor2& t) {
    if (t.rows() == 0) throw parameter_error("col_mean: empty tensor");
    Tensor2 out = col_sum(t);
    out *= 1.0 / static_cast<double>(t.rows());
    return out;
}

Tensor2 col_sum(const Tensor2& t) {
    Tensor2 out(1, t.cols());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double* row = t.row_ptr(i);
        for (std::size_t j = 0; j < t.cols(); ++j) out[j] += row[j];
    }
    return out;
}

Tensor2 sample_uniform(Rng& rng, const Tensor2& lo, const Tensor2& hi) {
    require_same_shape(lo, hi, "sample_uniform");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) throw parameter_error("sample_uniform: lo > hi");
    }
    Tensor2 out(lo.rows(), lo.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo[i], hi[i]);
    return out;
}

Tensor2 sample_normal(Rng& rng, double mean, double std, std::size_t rows, std::size_t cols) {
    if (std < 0.0) throw parameter_error("sample_normal: negative std");
    Tensor2 out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean + std * rng.normal();
    return out;
}

Tensor2 sample_sign(Rng& rng, std::size_t rows, std::size_t cols) {
    Tensor2 out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.sign();
    return out;
}

std::uint64_t fnv1a_hash(std::span<const double> values, std::uint64_t h) {
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace bond

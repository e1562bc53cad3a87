#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rejectlab {

using FeatureVector = std::vector<double>;

inline bool all_finite(const FeatureVector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Row-major dense matrix. Sized at construction, no views, no sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// y = M x
    FeatureVector apply(const FeatureVector& x) const {
        if (x.size() != cols_)
            throw std::invalid_argument("Matrix::apply: dimension mismatch");
        FeatureVector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    /// MᵀM
    Matrix transpose_times_self() const {
        Matrix out(cols_, cols_);
        for (std::size_t i = 0; i < cols_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < rows_; ++k) s += (*this)(k, i) * (*this)(k, j);
                out(i, j) = s;
            }
        return out;
    }

    double frobenius_norm_squared() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return s;
    }

    double trace() const {
        std::size_t n = std::min(rows_, cols_);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (*this)(i, i);
        return s;
    }

    void scale(double c) {
        for (double& v : data_) v *= c;
    }

    /// this += c * other
    void add_scaled(const Matrix& other, double c) {
        if (other.rows_ != rows_ || other.cols_ != cols_)
            throw std::invalid_argument("Matrix::add_scaled: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += c * other.data_[i];
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double x) { return std::isfinite(x); });
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Adaptive metric parametrized by its factor Omega. Lambda = OmegaᵀOmega is
/// derived on demand and therefore positive semi-definite by construction.
class MetricMatrix {
public:
    MetricMatrix() = default;

    explicit MetricMatrix(Matrix omega) : omega_(std::move(omega)) {
        if (omega_.rows() != omega_.cols())
            throw std::invalid_argument("MetricMatrix: omega must be square");
    }

    /// Omega = I/sqrt(n), so trace(Lambda) = 1 from the start.
    static MetricMatrix scaled_identity(std::size_t n) {
        if (n == 0) throw std::invalid_argument("MetricMatrix: dimension must be >= 1");
        Matrix m = Matrix::identity(n);
        m.scale(1.0 / std::sqrt(static_cast<double>(n)));
        return MetricMatrix(std::move(m));
    }

    std::size_t dim() const { return omega_.rows(); }
    const Matrix& omega() const { return omega_; }
    Matrix& omega() { return omega_; }

    Matrix lambda() const { return omega_.transpose_times_self(); }

    // trace(OmegaᵀOmega) = ||Omega||_F²
    double trace_lambda() const { return omega_.frobenius_norm_squared(); }

private:
    Matrix omega_;
};

inline double squared_euclidean(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("squared_euclidean: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// (a-b)ᵀ Lambda (a-b), evaluated as ||Omega (a-b)||² so it cannot go negative.
inline double quadratic_form_distance(const FeatureVector& a, const FeatureVector& b,
                                      const MetricMatrix& m) {
    if (a.size() != b.size() || a.size() != m.dim())
        throw std::invalid_argument("quadratic_form_distance: dimension mismatch");
    const Matrix& omega = m.omega();
    double s = 0.0;
    for (std::size_t i = 0; i < omega.rows(); ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < omega.cols(); ++j) r += omega(i, j) * (a[j] - b[j]);
        s += r * r;
    }
    return s;
}

/// Rescale Omega so trace(Lambda) = 1.
inline MetricMatrix normalize_trace(const MetricMatrix& m) {
    double t = m.trace_lambda();
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("normalize_trace: degenerate metric (trace " +
                                    std::to_string(t) + ")");
    Matrix omega = m.omega();
    omega.scale(1.0 / std::sqrt(t));
    return MetricMatrix(std::move(omega));
}

/// splitmix64 finalizer; derives decorrelated stream seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

/// Shortest decimal form that round-trips exactly; used for all text output so
/// identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace rejectlab

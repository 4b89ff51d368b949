#pragma once

/// @file
/// Dense real linear algebra used by filter-bank design: SPD solves through
/// Cholesky, a low-rank Woodbury solve, and a DFT origin-correlation routine
/// that exists to cross-check the spatial-domain inner product in tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mscfb/error.hpp"

namespace mscfb {

class RealVector {
public:
    RealVector() = default;
    explicit RealVector(std::size_t n, double value = 0.0) : data_(n, value) {}
    RealVector(std::initializer_list<double> values) : data_(values) {}
    explicit RealVector(std::vector<double> values) : data_(std::move(values)) {}
    explicit RealVector(std::span<const double> values) : data_(values.begin(), values.end()) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    const std::vector<double>& values() const noexcept { return data_; }

    friend bool operator==(const RealVector&, const RealVector&) = default;

private:
    std::vector<double> data_;
};

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            detail::require(r.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline constexpr double kSymmetryTolerance = 1e-12;

inline double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "dot of lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

inline double dot(const RealVector& u, const RealVector& v) { return dot(u.span(), v.span()); }

inline double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }
inline double norm2(const RealVector& u) { return norm2(u.span()); }

inline RealVector multiply(const DenseMatrix& a, const RealVector& x) {
    detail::require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "matrix-vector product");
    RealVector y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x.span());
    return y;
}

/// max |a_ij - a_ji| relative to max |a_ij|; zero for the zero matrix.
inline double asymmetry(const DenseMatrix& a) {
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            if (j > i) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

inline void require_symmetric(const DenseMatrix& a) {
    detail::require(a.rows() == a.cols(), ErrorCode::DimensionMismatch,
                    "matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    const double asym = asymmetry(a);
    if (asym > kSymmetryTolerance)
        throw Error(ErrorCode::NotSymmetric, "relative asymmetry " + std::to_string(asym));
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, stored
/// row-major with the strict upper triangle zeroed.
class CholeskyFactor {
public:
    /// Symmetrizes `a` as (A + A^T)/2 before factoring. Throws NotSymmetric
    /// when the relative asymmetry exceeds 1e-12 and NotPositiveDefinite on
    /// a non-positive pivot.
    explicit CholeskyFactor(const DenseMatrix& a) : l_(a.rows(), a.rows()) {
        require_symmetric(a);
        const std::size_t n = a.rows();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) l_(i, j) = 0.5 * (a(i, j) + a(j, i));

        for (std::size_t j = 0; j < n; ++j) {
            auto rj = l_.row(j);
            double pivot = rj[j];
            for (std::size_t k = 0; k < j; ++k) pivot -= rj[k] * rj[k];
            if (!(pivot > 0.0))
                throw Error(ErrorCode::NotPositiveDefinite,
                            "pivot " + std::to_string(pivot) + " at column " + std::to_string(j));
            const double d = std::sqrt(pivot);
            rj[j] = d;
            for (std::size_t i = j + 1; i < n; ++i) {
                auto ri = l_.row(i);
                double s = ri[j];
                for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
                ri[j] = s / d;
            }
        }
    }

    std::size_t dimension() const noexcept { return l_.rows(); }
    const DenseMatrix& lower() const noexcept { return l_; }

    RealVector solve(const RealVector& b) const {
        const std::size_t n = l_.rows();
        detail::require(b.size() == n, ErrorCode::DimensionMismatch,
                        "rhs length " + std::to_string(b.size()) + " for dimension " + std::to_string(n));
        RealVector x = b;
        // L y = b
        for (std::size_t i = 0; i < n; ++i) {
            auto ri = l_.row(i);
            double s = x[i];
            for (std::size_t k = 0; k < i; ++k) s -= ri[k] * x[k];
            x[i] = s / ri[i];
        }
        // L^T x = y
        for (std::size_t ii = n; ii-- > 0;) {
            x[ii] /= l_(ii, ii);
            const double xi = x[ii];
            auto ri = l_.row(ii);
            for (std::size_t k = 0; k < ii; ++k) x[k] -= ri[k] * xi;
        }
        return x;
    }

private:
    DenseMatrix l_;
};

inline RealVector cholesky_solve(const DenseMatrix& a, const RealVector& b) {
    detail::require(a.rows() == a.cols() && a.rows() == b.size(), ErrorCode::DimensionMismatch,
                    "system " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " with rhs " +
                        std::to_string(b.size()));
    return CholeskyFactor(a).solve(b);
}

/// Solves (alpha*I + beta*F*F^T) x = b through the N x N inner system
/// (alpha*I + beta*F^T*F) y = F^T b, x = (b - beta*F*y) / alpha, where F is
/// `factors` (rows = system dimension, cols = N).
inline RealVector woodbury_solve(double alpha, double beta, const DenseMatrix& factors, const RealVector& b) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha = " + std::to_string(alpha));
    detail::require(beta >= 0.0, ErrorCode::NonPositiveAlpha, "beta must be non-negative");
    detail::require(factors.rows() == b.size(), ErrorCode::DimensionMismatch,
                    "factors have " + std::to_string(factors.rows()) + " rows, rhs has " + std::to_string(b.size()));

    const std::size_t n = factors.rows();
    const std::size_t k = factors.cols();
    RealVector x(n);
    if (beta == 0.0 || k == 0) {
        for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / alpha;
        return x;
    }

    DenseMatrix inner(k, k);
    RealVector ftb(k);
    for (std::size_t r = 0; r < n; ++r) {
        auto fr = factors.row(r);
        const double br = b[r];
        for (std::size_t i = 0; i < k; ++i) {
            const double fi = fr[i];
            ftb[i] += fi * br;
            if (fi == 0.0) continue;
            auto irow = inner.row(i);
            for (std::size_t j = 0; j <= i; ++j) irow[j] += fi * fr[j];
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            inner(i, j) *= beta;
            inner(j, i) = inner(i, j);
        }
        inner(i, i) = alpha + beta * inner(i, i);
    }

    const RealVector y = CholeskyFactor(inner).solve(ftb);
    for (std::size_t r = 0; r < n; ++r) x[r] = (b[r] - beta * dot(factors.row(r), y.span())) / alpha;
    return x;
}

/// Sum over k of conj(X[k]) * H[k], where X and H are unnormalized forward
/// DFTs (period = length) of x and h. Equals length * dot(x, h) for real
/// inputs. Direct O(D^2) evaluation.
inline double dft_origin_correlation(std::span<const double> x, std::span<const double> h) {
    detail::require(x.size() == h.size() && !x.empty(), ErrorCode::DimensionMismatch,
                    "dft correlation of lengths " + std::to_string(x.size()) + " and " + std::to_string(h.size()));
    const std::size_t d = x.size();
    std::vector<std::complex<double>> twiddle(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(d);
        twiddle[i] = {std::cos(angle), std::sin(angle)};
    }
    auto transform = [&](std::span<const double> v, std::size_t k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t n = 0; n < d; ++n) acc += v[n] * twiddle[(k * n) % d];
        return acc;
    };
    std::complex<double> total{0.0, 0.0};
    for (std::size_t k = 0; k < d; ++k) total += std::conj(transform(x, k)) * transform(h, k);
    return total.real();
}

inline double dft_origin_correlation(const RealVector& x, const RealVector& h) {
    return dft_origin_correlation(x.span(), h.span());
}

} // namespace mscfb

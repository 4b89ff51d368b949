#pragma once

// Test-only generators and reference implementations. Nothing here calls the
// library routines it is used to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mscfb/mscfb.hpp"

namespace mscfb::testing {

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline RealVector random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    return RealVector(random_values(rng, n, lo, hi));
}

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    DenseMatrix m(r, c);
    for (auto& x : m.data()) x = std::uniform_real_distribution<double>(lo, hi)(rng);
    return m;
}

/// B^T B + I
inline DenseMatrix random_spd(std::mt19937_64& rng, std::size_t n) {
    const auto b = random_matrix(rng, n, n);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b(k, i) * b(k, j);
            a(i, j) = s + (i == j ? 1.0 : 0.0);
        }
    return a;
}

/// Neumaier-compensated dot product.
inline double compensated_dot(const std::vector<double>& u, const std::vector<double>& v) {
    double sum = 0.0, c = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double p = u[i] * v[i];
        const double t = sum + p;
        if (std::abs(sum) >= std::abs(p)) c += (sum - t) + p;
        else c += (p - t) + sum;
        sum = t;
    }
    return sum + c;
}

/// Gaussian elimination with partial pivoting on a copy of the system.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

inline std::vector<std::vector<double>> to_rows(const DenseMatrix& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

inline double naive_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double relative_residual(const DenseMatrix& a, const RealVector& x, const RealVector& b) {
    std::vector<double> r(b.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < a.cols(); ++j) s += static_cast<long double>(a(i, j)) * x[j];
        r[i] = static_cast<double>(s - b[i]);
    }
    return naive_norm(r) / naive_norm(b.values());
}

/// A labeled sample made of M random blocks of length D.
inline SubregionSample random_sample(std::mt19937_64& rng, std::size_t m, std::size_t d, std::string label,
                                     double lo = 0.0, double hi = 1.0) {
    SubregionSample s;
    for (std::size_t k = 0; k < m; ++k) s.blocks.push_back(random_vector(rng, d, lo, hi));
    s.label = std::move(label);
    return s;
}

/// Block spec whose grid is M blocks of D = dw*dh pixels laid along x.
inline BlockSpec row_spec(std::uint32_t m, std::uint32_t d) { return BlockSpec{d, 1, m * d, 1}; }

struct RandomInstance {
    BlockSpec spec;
    std::vector<SubregionSample> samples;
};

/// N samples with entries in [0,1), labels assigned round-robin over C
/// classes.
inline RandomInstance random_instance(std::mt19937_64& rng, std::uint32_t classes, std::uint32_t m, std::uint32_t d,
                                      std::uint32_t total) {
    RandomInstance inst{row_spec(m, d), {}};
    for (std::uint32_t i = 0; i < total; ++i)
        inst.samples.push_back(random_sample(rng, m, d, "c" + std::to_string(i % classes)));
    return inst;
}

} // namespace mscfb::testing

#include <filesystem>
#include <unistd.h>

namespace mscfb::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("mscfb_" + name + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

} // namespace mscfb::testing

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ndtherm/errors.hpp"

namespace ndtherm {

/// Dense symmetric matrix. Full row-major storage; set() writes both
/// triangles so the matrix is symmetric by construction.
class SymMatrix {
public:
    explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    std::size_t dim() const { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        a_[i * n_ + j] = v;
        a_[j * n_ + i] = v;
    }

    double mean_diagonal() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            s += a_[i * n_ + i];
        return n_ ? s / static_cast<double>(n_) : 0.0;
    }

private:
    std::size_t n_;
    std::vector<double> a_;
};

/// Lower-triangular Cholesky factor of A + jitter_used * I.
struct CholeskyFactor {
    std::size_t n = 0;
    std::vector<double> lower;  // row-major, strictly upper part zero
    double jitter_used = 0.0;

    double at(std::size_t i, std::size_t j) const { return lower[i * n + j]; }
};

namespace detail {

// In-place attempt; returns false as soon as a pivot is not positive.
inline bool try_cholesky(const SymMatrix& a, double jitter, std::vector<double>& l) {
    const std::size_t n = a.dim();
    l.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j) + jitter;
        for (std::size_t k = 0; k < j; ++k)
            diag -= l[j * n + k] * l[j * n + k];
        if (!(diag > 0.0) || !std::isfinite(diag))
            return false;
        const double ljj = std::sqrt(diag);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k)
                v -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = v / ljj;
        }
    }
    return true;
}

} // namespace detail

/// Factor A (plus escalating diagonal jitter if needed) as L*L^T. Jitter
/// starts at 1e-10 * mean(diag A) and grows tenfold per retry until it
/// would exceed max_jitter.
inline CholeskyFactor cholesky(const SymMatrix& a, double max_jitter = 0.0) {
    if (max_jitter < 0.0 || !std::isfinite(max_jitter))
        throw ValidationError("cholesky: max_jitter must be finite and >= 0");
    CholeskyFactor f;
    f.n = a.dim();
    if (detail::try_cholesky(a, 0.0, f.lower))
        return f;
    double jitter = 1e-10 * std::abs(a.mean_diagonal());
    if (jitter <= 0.0)
        jitter = 1e-10;
    while (jitter <= max_jitter) {
        if (detail::try_cholesky(a, jitter, f.lower)) {
            f.jitter_used = jitter;
            return f;
        }
        jitter *= 10.0;
    }
    throw NotPositiveDefinite("cholesky: jitter escalation exhausted at max_jitter=" +
                              std::to_string(max_jitter));
}

inline void solve_lower_inplace(const CholeskyFactor& f, std::span<double> x) {
    const std::size_t n = f.n;
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        for (std::size_t k = 0; k < i; ++k)
            v -= f.lower[i * n + k] * x[k];
        x[i] = v / f.lower[i * n + i];
    }
}

inline void solve_upper_transposed_inplace(const CholeskyFactor& f, std::span<double> x) {
    const std::size_t n = f.n;
    for (std::size_t ii = n; ii-- > 0;) {
        double v = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            v -= f.lower[k * n + ii] * x[k];
        x[ii] = v / f.lower[ii * n + ii];
    }
}

/// Solve (L L^T) x = b by forward then back substitution.
inline std::vector<double> solve_chol(const CholeskyFactor& f, std::span<const double> b) {
    if (b.size() != f.n)
        throw ValidationError("solve_chol: dimension mismatch");
    std::vector<double> x(b.begin(), b.end());
    solve_lower_inplace(f, x);
    solve_upper_transposed_inplace(f, x);
    return x;
}

/// log det(A + jitter*I) = 2 * sum(log diag L).
inline double log_det(const CholeskyFactor& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.n; ++i)
        s += std::log(f.at(i, i));
    return 2.0 * s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace ndtherm

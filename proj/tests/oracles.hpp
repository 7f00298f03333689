#pragma once

// Test-side oracles, deliberately independent of the library's own
// numerics: a plain midpoint bisection, eigenvalues via the companion
// matrix trace/determinant route, and central finite-difference Jacobians
// of planar vector fields.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-13, int max_iter = 300) {
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) throw std::runtime_error("oracle::bisect: not bracketed");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

using Matrix2 = std::array<std::array<double, 2>, 2>;
using EigenPair2 = std::array<std::complex<double>, 2>;

// Eigenvalues of a real 2x2 matrix from its trace and determinant.
inline EigenPair2 matrix_eigenvalues(const Matrix2& m) {
    const double tr = m[0][0] + m[1][1];
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double disc = tr * tr / 4.0 - det;
    if (disc < 0.0) {
        const std::complex<double> lambda(tr / 2.0, std::sqrt(-disc));
        return {lambda, std::conj(lambda)};
    }
    const double root = std::sqrt(disc);
    return {std::complex<double>(tr / 2.0 + root, 0.0), std::complex<double>(tr / 2.0 - root, 0.0)};
}

// Roots of a*s^2 + b*s + c = 0 as the eigenvalues of its companion matrix
// [[0, 1], [-c/a, -b/a]].
inline EigenPair2 companion_roots(double a, double b, double c) {
    return matrix_eigenvalues(Matrix2{{{0.0, 1.0}, {-c / a, -b / a}}});
}

// Central finite-difference Jacobian of a planar vector field.
template <typename F>
Matrix2 fd_jacobian(F&& f, std::array<double, 2> x, double h = 1e-6) {
    Matrix2 jac{};
    for (int col = 0; col < 2; ++col) {
        auto hi = x;
        auto lo = x;
        hi[col] += h;
        lo[col] -= h;
        const auto f_hi = f(hi);
        const auto f_lo = f(lo);
        jac[0][col] = (f_hi[0] - f_lo[0]) / (2.0 * h);
        jac[1][col] = (f_hi[1] - f_lo[1]) / (2.0 * h);
    }
    return jac;
}

// Unordered comparison of two eigenvalue pairs, relative to their modulus.
inline double eigenpair_distance(const EigenPair2& a, const EigenPair2& b) {
    const double direct = std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
    const double swapped = std::max(std::abs(a[0] - b[1]), std::abs(a[1] - b[0]));
    const double scale = std::max({std::abs(b[0]), std::abs(b[1]), 1e-300});
    return std::min(direct, swapped) / scale;
}

}  // namespace oracle

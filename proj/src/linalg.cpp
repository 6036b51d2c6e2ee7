#include "texdr/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "texdr/errors.hpp"

namespace texdr {

void LuDecomposition::compute(std::span<const double> matrix, std::size_t dim) {
    n = dim;
    lu.assign(matrix.begin(), matrix.end());
    pivots.resize(n);
    swaps = 0;
    for (std::size_t i = 0; i < n; ++i) pivots[i] = static_cast<int>(i);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(lu[col * n + col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double v = std::abs(lu[row * n + col]);
            if (v > best) {
                best = v;
                pivot = row;
            }
        }
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k)
                std::swap(lu[col * n + k], lu[pivot * n + k]);
            std::swap(pivots[col], pivots[pivot]);
            ++swaps;
        }
        const double diag = lu[col * n + col];
        if (diag == 0.0) continue; // singular; determinant() reports 0
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = lu[row * n + col] / diag;
            lu[row * n + col] = factor;
            for (std::size_t k = col + 1; k < n; ++k)
                lu[row * n + k] -= factor * lu[col * n + k];
        }
    }
}

double LuDecomposition::determinant() const {
    double det = (swaps % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) det *= lu[i * n + i];
    return det;
}

void LuDecomposition::solve(std::span<double> b) {
    // Apply permutation, then forward/back substitution.
    auto& y = solve_workspace;
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = b[static_cast<std::size_t>(pivots[i])];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= lu[i * n + k] * y[k];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) y[ii] -= lu[ii * n + k] * y[k];
        const double diag = lu[ii * n + ii];
        if (diag == 0.0) throw NumericalError("LU solve on singular matrix");
        y[ii] /= diag;
    }
    std::copy(y.begin(), y.end(), b.begin());
}

std::vector<double> symmetric_eigenvalues(std::span<const double> matrix, std::size_t n) {
    std::vector<double> a(matrix.begin(), matrix.end());
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-30) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace texdr

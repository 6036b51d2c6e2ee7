#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace texdr {

/// In-place LU decomposition with partial pivoting of an n x n row-major
/// matrix. Workspace-based so hot callers do not allocate. Returns the
/// determinant sign flip count via `swaps`.
struct LuDecomposition {
    std::size_t n = 0;
    std::vector<double> lu;    // n x n, row-major
    std::vector<int> pivots;   // row permutation
    int swaps = 0;
    std::vector<double> solve_workspace;

    void compute(std::span<const double> matrix, std::size_t n);
    double determinant() const;
    /// Solve A x = b in place (b becomes x).
    void solve(std::span<double> b);
};

/// Eigenvalues of a symmetric n x n matrix via cyclic Jacobi rotations,
/// ascending. Intended for small matrices (bin-similarity checks,
/// covariance PSD asserts).
std::vector<double> symmetric_eigenvalues(std::span<const double> matrix, std::size_t n);

} // namespace texdr

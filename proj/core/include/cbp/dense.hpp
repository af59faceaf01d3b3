#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cbp {

/// Minimal dense row-major matrix.  Everything in the library is desk
/// scale, so no expression templates, no views, just contiguous
/// storage and a handful of kernels below.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    double* row_ptr(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row_ptr(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

    static Matrix identity(int n);
    Matrix transposed() const;
};

Matrix matmul(const Matrix& A, const Matrix& B);
/// C = A^T * B
Matrix matmul_tn(const Matrix& A, const Matrix& B);
/// C = A * B^T
Matrix matmul_nt(const Matrix& A, const Matrix& B);

double max_abs(std::span<const double> v);

namespace dense {

/// Plain Cholesky of a symmetric matrix stored full in `a` (n x n,
/// row-major).  Writes the upper factor in place (lower triangle is
/// zeroed).  Returns false as soon as a pivot falls at or below
/// `pivot_floor`.
bool cholesky_upper(double* a, int n, double pivot_floor);

/// Factorization L * D * L^T of a symmetric quasi-definite matrix,
/// no pivoting.  `expected_sign[j]` (+1/-1) is the sign each pivot is
/// supposed to have; pivots that are tiny or of the wrong sign are
/// clamped to expected_sign * min_pivot and counted.  Storage: strict
/// lower triangle of `a` receives L, `d` receives the diagonal.
/// The update is blocked so large fronts run at dgemm-like speed.
int ldl_factor(double* a, int n, const signed char* expected_sign, double min_pivot,
               std::vector<double>& d);

/// Solve (L D L^T) x = b in place using the output of ldl_factor.
void ldl_solve(const double* a, int n, const double* d, double* b);

struct JacobiResult {
    bool converged = false;
    int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.  `a` (n x n,
/// full storage) is destroyed; eigenvalues land in `w` unsorted and
/// the accumulated rotations in `v` (columns are eigenvectors).
/// Stops once every off-diagonal entry is at or below
/// rel_tol * max(1, max |a_ij| at entry).
JacobiResult jacobi_eig(double* a, int n, double* w, Matrix& v, double rel_tol,
                        int max_sweeps);

/// x := U^{-1} x for upper triangular U (full storage).
void solve_upper(const double* u, int n, double* x);
/// x := U^{-T} x.
void solve_upper_t(const double* u, int n, double* x);

} // namespace dense
} // namespace cbp

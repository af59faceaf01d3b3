#pragma once

#include <vector>

#include "cbp/config.hpp"
#include "cbp/dense.hpp"
#include "cbp/errors.hpp"

namespace cbp {

/// Dense symmetric matrix.  Full storage, both triangles kept in sync
/// by construction: every mutator writes (i,j) and (j,i) together.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int order) : n_(order), a_(check_order(order), 0.0) {}

    static SymMat identity(int order);
    /// Builds from full row-major data; the two triangles are averaged.
    static SymMat from_full(int order, std::span<const double> data);

    int order() const { return n_; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    void set(int i, int j, double v) {
        a_[static_cast<size_t>(i) * n_ + j] = v;
        a_[static_cast<size_t>(j) * n_ + i] = v;
    }
    void add(int i, int j, double v) {
        a_[static_cast<size_t>(i) * n_ + j] += v;
        if (i != j) a_[static_cast<size_t>(j) * n_ + i] += v;
    }

    const std::vector<double>& data() const { return a_; }
    double trace() const;
    double inf_norm() const;  // max |a_ij|
    void add_scaled_identity(double s);

    SymMat& operator+=(const SymMat& other);
    SymMat& operator*=(double s);

private:
    static size_t check_order(int order) {
        if (order < 1) throw InvalidInput("SymMat order must be >= 1");
        return static_cast<size_t>(order) * order;
    }
    int n_ = 0;
    std::vector<double> a_;
};

/// A · B = sum_ij A_ij B_ij (trace inner product).
double dot(const SymMat& a, const SymMat& b);
/// U^T U for a square matrix U.
SymMat gram_of(const Matrix& u);
/// U^T S U.
SymMat congruence(const Matrix& u, const SymMat& s);

struct UpperTriangular {
    int order = 0;
    Matrix m;  // full storage, zeros below the diagonal

    double operator()(int i, int j) const { return m(i, j); }
};

struct CholeskyResult {
    UpperTriangular factor;
    /// The diagonal shift delta that was added to make the
    /// factorization go through (0 when none was needed).
    double shift = 0.0;
};

/// Upper-triangular Cholesky U with U^T U = A + delta I.  delta is the
/// smallest value in {0, reg, 2 reg, 4 reg, ...} for which every pivot
/// stays strictly positive.  Throws NotFactorizable once delta would
/// exceed 1e6 * reg, and InvalidInput for reg < 0.
CholeskyResult cholesky(const SymMat& a, double reg);

/// Default pursuit regularization for a matrix about to be factored.
double default_chol_reg(const SymMat& a, const Tolerances& tol = Tolerances::defaults());

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column k pairs with eigenvalue k
};

/// Cyclic Jacobi eigendecomposition.  Throws NoConvergence if the
/// sweep cap is exceeded.
EigenDecomposition eig_sym(const SymMat& a, const Tolerances& tol = Tolerances::defaults());

double min_eigenvalue(const SymMat& a, const Tolerances& tol = Tolerances::defaults());

/// Diagonal dominance: a_ii + slack >= sum_{j != i} |a_ij| for all i.
bool is_dd(const SymMat& a, double slack);

/// Scaled diagonal dominance, decided by the feasibility LP
///   find d:  d_i >= 1,  d_i a_ii >= sum_{j != i} d_j |a_ij| - tol.
/// Solved with the in-repo conic solver; propagates SolverFailure.
bool is_sdd(const SymMat& a, double tol);

} // namespace cbp

#pragma once

#include <utility>
#include <vector>

#include "cbp/conic.hpp"

namespace cbp {

/// Affine expression sum_k coeff_k * var_k + constant over the
/// variables of a ProblemBuilder.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinExpr() = default;
    /*implicit*/ LinExpr(double c) : constant(c) {}
    static LinExpr var(int index, double coeff = 1.0) {
        LinExpr e;
        e.terms.emplace_back(index, coeff);
        return e;
    }
    LinExpr& add(int index, double coeff) {
        if (coeff != 0.0) terms.emplace_back(index, coeff);
        return *this;
    }
    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator*=(double s);
    /// Merge duplicate variables, drop zeros.
    void compress();
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr e);

/// Symmetric matrix of affine expressions.
class AffineMatrix {
public:
    AffineMatrix() = default;
    explicit AffineMatrix(int order) : n_(order), e_(svec_dim(order)) {}

    int order() const { return n_; }
    const LinExpr& at(int i, int j) const { return e_[idx(i, j)]; }
    LinExpr& at(int i, int j) { return e_[idx(i, j)]; }
    void set(int i, int j, LinExpr v) { e_[idx(i, j)] = std::move(v); }

    /// <E, M> for a constant symmetric E (both triangles counted).
    LinExpr contract(const SymMat& e) const;
    /// v^T M v for a constant vector v.
    LinExpr quad_form(std::span<const double> v) const;
    /// U^T M U entry by entry (U square, same order).
    AffineMatrix congruence(const Matrix& u) const;

private:
    static int idx_static(int i, int j) { return i <= j ? svec_index(i, j) : svec_index(j, i); }
    int idx(int i, int j) const { return idx_static(i, j); }
    int n_ = 0;
    std::vector<LinExpr> e_;
};

/// Incremental construction of a standard-form ConicProblem.
/// Variables are appended (free block first by convention of the
/// final problem; the builder reorders on build), rows are equality
/// constraints expr == rhs, and inequalities get their slack here.
class ProblemBuilder {
public:
    int add_free();
    /// Returns the index of the first of `count` new nonnegative vars.
    int add_nonneg(int count);
    int add_rotated_soc(int dim);
    /// Returns (cone list position, first variable index).
    std::pair<int, int> add_psd(int order);

    void add_eq(const LinExpr& e, double rhs);
    /// expr >= 0 via a fresh slack.
    void add_ineq_ge0(const LinExpr& e);
    void set_objective(const LinExpr& e, bool maximize = false);

    ConicProblem build() const;

    /// Solution helpers (valid for the problem built by this builder).
    double eval(const LinExpr& e, const ConicSolution& sol) const;
    SymMat eval_sym(const AffineMatrix& m, const ConicSolution& sol) const;
    double objective_constant() const { return obj_.constant; }
    bool maximizing() const { return maximize_; }
    /// Signed objective value including the constant term.
    double objective_value(const ConicSolution& sol) const;
    /// Value of builder variable `v` in a solution.
    double value_of(int v, const ConicSolution& sol) const;

    int num_vars() const { return static_cast<int>(kind_.size()); }

private:
    enum class VK : unsigned char { Free, Cone };
    std::vector<VK> kind_;
    std::vector<int> cone_of_;  // builder var -> cone list index (or -1)
    std::vector<ConeSpec> cones_;
    std::vector<int> cone_first_;  // first builder var of each cone
    std::vector<std::pair<LinExpr, double>> eqs_;
    LinExpr obj_;
    bool maximize_ = false;

    // mapping to the built problem
    mutable std::vector<int> perm_;  // builder var -> problem column
    void ensure_perm() const;
};

} // namespace cbp

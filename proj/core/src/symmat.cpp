#include "cbp/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cbp/conic.hpp"

namespace cbp {

SymMat SymMat::identity(int order) {
    SymMat s(order);
    for (int i = 0; i < order; ++i) s.set(i, i, 1.0);
    return s;
}

SymMat SymMat::from_full(int order, std::span<const double> data) {
    if (static_cast<int>(data.size()) != order * order)
        throw InvalidInput("from_full: data size does not match order");
    SymMat s(order);
    for (int i = 0; i < order; ++i)
        for (int j = i; j < order; ++j)
            s.set(i, j, 0.5 * (data[static_cast<size_t>(i) * order + j] +
                               data[static_cast<size_t>(j) * order + i]));
    return s;
}

double SymMat::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMat::inf_norm() const { return max_abs(a_); }

void SymMat::add_scaled_identity(double s) {
    for (int i = 0; i < n_; ++i) a_[static_cast<size_t>(i) * n_ + i] += s;
}

SymMat& SymMat::operator+=(const SymMat& other) {
    if (other.n_ != n_) throw InvalidInput("SymMat +=: order mismatch");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
    return *this;
}

SymMat& SymMat::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

double dot(const SymMat& a, const SymMat& b) {
    if (a.order() != b.order()) throw InvalidInput("dot: order mismatch");
    double acc = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (size_t k = 0; k < da.size(); ++k) acc += da[k] * db[k];
    return acc;
}

SymMat gram_of(const Matrix& u) {
    const int n = u.cols;
    SymMat g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < u.rows; ++k) acc += u(k, i) * u(k, j);
            g.set(i, j, acc);
        }
    return g;
}

SymMat congruence(const Matrix& u, const SymMat& s) {
    if (u.rows != s.order()) throw InvalidInput("congruence: size mismatch");
    // U^T S U
    Matrix su(u.rows, u.cols);
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < u.rows; ++k) acc += s(i, k) * u(k, j);
            su(i, j) = acc;
        }
    SymMat r(u.cols);
    for (int i = 0; i < u.cols; ++i)
        for (int j = i; j < u.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < u.rows; ++k) acc += u(k, i) * su(k, j);
            r.set(i, j, acc);
        }
    return r;
}

CholeskyResult cholesky(const SymMat& a, double reg) {
    if (reg < 0.0) throw InvalidInput("cholesky: reg must be nonnegative");
    const int n = a.order();
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a(i, i)));
    // semidefinite detection threshold, scaled like LAPACK pivots
    const double floor = n * 2.220446049250313e-16 * std::max(1.0, max_diag);

    std::vector<double> work;
    double delta = 0.0;
    while (true) {
        work = a.data();
        if (delta != 0.0)
            for (int i = 0; i < n; ++i) work[static_cast<size_t>(i) * n + i] += delta;
        if (dense::cholesky_upper(work.data(), n, floor)) break;
        if (delta == 0.0) {
            delta = reg;
        } else {
            delta *= 2.0;
        }
        if (reg == 0.0 || delta > 1e6 * reg)
            throw NotFactorizable("cholesky: no shift <= 1e6*reg admits positive pivots");
    }
    CholeskyResult res;
    res.shift = delta;
    res.factor.order = n;
    res.factor.m = Matrix(n, n);
    std::memcpy(res.factor.m.a.data(), work.data(), work.size() * sizeof(double));
    return res;
}

double default_chol_reg(const SymMat& a, const Tolerances& tol) {
    return tol.chol_reg_scale * (1.0 + a.trace() / a.order());
}

EigenDecomposition eig_sym(const SymMat& a, const Tolerances& tol) {
    const int n = a.order();
    std::vector<double> work = a.data();
    std::vector<double> w(n);
    Matrix v;
    auto res = dense::jacobi_eig(work.data(), n, w.data(), v, tol.jacobi_off,
                                 tol.jacobi_max_sweeps);
    if (!res.converged)
        throw NoConvergence("eig_sym: Jacobi sweeps exceeded the cap");
    // sort ascending, carrying eigenvector columns along
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](int i, int j) { return w[i] < w[j]; });
    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = w[perm[k]];
        for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, perm[k]);
    }
    return out;
}

double min_eigenvalue(const SymMat& a, const Tolerances& tol) {
    return eig_sym(a, tol).eigenvalues.front();
}

bool is_dd(const SymMat& a, double slack) {
    const int n = a.order();
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::fabs(a(i, j));
        if (a(i, i) + slack < off) return false;
    }
    return true;
}

bool is_sdd(const SymMat& a, double tol) {
    const int n = a.order();
    if (n == 1) return a(0, 0) + tol >= 0.0;
    // d = 1 + u with u >= 0; one slack per row inequality
    ConicProblem p;
    p.cones.push_back(ConeSpec::nonneg(2 * n));
    p.c.assign(2 * n, 0.0);
    for (int i = 0; i < n; ++i) p.c[i] = 1.0;  // min sum u keeps the LP bounded
    for (int i = 0; i < n; ++i) {
        SparseRow row;
        double rhs = tol - a(i, i);
        row.add(i, a(i, i));
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double m = std::fabs(a(i, j));
            rhs += m;
            if (m != 0.0) row.add(j, -m);
        }
        row.add(n + i, -1.0);
        p.rows.push_back(std::move(row));
        p.b.push_back(rhs);
    }
    auto sol = solve(p);
    switch (sol.status) {
        case SolveStatus::Optimal: return true;
        case SolveStatus::PrimalInfeasible: return false;
        default:
            throw SolverFailure("is_sdd: conic solve ended with status " +
                                std::string(to_string(sol.status)));
    }
}

} // namespace cbp

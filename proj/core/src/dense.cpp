#include "cbp/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cbp {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row_ptr(i);
        double* ci = C.row_ptr(i);
        for (int k = 0; k < A.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = B.row_ptr(k);
            for (int j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

Matrix matmul_tn(const Matrix& A, const Matrix& B) {
    Matrix C(A.cols, B.cols);
    for (int k = 0; k < A.rows; ++k) {
        const double* ak = A.row_ptr(k);
        const double* bk = B.row_ptr(k);
        for (int i = 0; i < A.cols; ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = C.row_ptr(i);
            for (int j = 0; j < B.cols; ++j) ci[j] += aki * bk[j];
        }
    }
    return C;
}

Matrix matmul_nt(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row_ptr(i);
        double* ci = C.row_ptr(i);
        for (int j = 0; j < B.rows; ++j) {
            const double* bj = B.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < A.cols; ++k) acc += ai[k] * bj[k];
            ci[j] = acc;
        }
    }
    return C;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

namespace dense {

bool cholesky_upper(double* a, int n, double pivot_floor) {
    for (int k = 0; k < n; ++k) {
        double pivot = a[static_cast<size_t>(k) * n + k];
        if (pivot <= pivot_floor) return false;
        const double r = std::sqrt(pivot);
        a[static_cast<size_t>(k) * n + k] = r;
        const double inv = 1.0 / r;
        double* rowk = a + static_cast<size_t>(k) * n;
        for (int j = k + 1; j < n; ++j) rowk[j] *= inv;
        for (int i = k + 1; i < n; ++i) {
            const double lik = rowk[i];
            if (lik == 0.0) continue;
            double* rowi = a + static_cast<size_t>(i) * n;
            for (int j = i; j < n; ++j) rowi[j] -= lik * rowk[j];
        }
    }
    // zero the strict lower triangle so the result is a clean U
    for (int i = 1; i < n; ++i)
        std::memset(a + static_cast<size_t>(i) * n, 0, sizeof(double) * static_cast<size_t>(i));
    return true;
}

namespace {

// Trailing update C -= W * P^T restricted to the lower triangle.
// W is (m x nb) row-major, Pt is the transposed panel (nb x m) so the
// innermost loop runs along contiguous memory and vectorizes.
void syrk_update_lower(double* c, int ldc, int m, int nb, const double* w,
                       const double* pt) {
    constexpr int TI = 96;
    for (int ib = 0; ib < m; ib += TI) {
        const int iend = std::min(ib + TI, m);
        for (int i = ib; i < iend; ++i) {
            double* ci = c + static_cast<size_t>(i) * ldc;
            const double* wi = w + static_cast<size_t>(i) * nb;
            const int jmax = i + 1;
            for (int k = 0; k < nb; ++k) {
                const double wik = wi[k];
                if (wik == 0.0) continue;
                const double* ptk = pt + static_cast<size_t>(k) * m;
                for (int j = 0; j < jmax; ++j) ci[j] -= wik * ptk[j];
            }
        }
    }
}

} // namespace

int ldl_factor(double* a, int n, const signed char* expected_sign, double min_pivot,
               std::vector<double>& d) {
    constexpr int NB = 64;
    d.assign(n, 0.0);
    int clamped = 0;
    std::vector<double> w;     // panel columns scaled by D
    std::vector<double> pt;    // transposed panel
    for (int k0 = 0; k0 < n; k0 += NB) {
        const int nb = std::min(NB, n - k0);
        // factor the panel (left-looking within the panel)
        for (int j = k0; j < k0 + nb; ++j) {
            double* colj = a; // column j lives in rows j..n-1 at a[i*n+j]
            for (int t = k0; t < j; ++t) {
                const double ljt = a[static_cast<size_t>(j) * n + t];
                const double mult = ljt * d[t];
                if (mult == 0.0) continue;
                for (int i = j; i < n; ++i)
                    colj[static_cast<size_t>(i) * n + j] -= a[static_cast<size_t>(i) * n + t] * mult;
            }
            double pivot = a[static_cast<size_t>(j) * n + j];
            const double sign = expected_sign ? static_cast<double>(expected_sign[j]) : 1.0;
            if (sign * pivot < min_pivot) {
                pivot = sign * min_pivot;
                ++clamped;
            }
            d[j] = pivot;
            const double inv = 1.0 / pivot;
            a[static_cast<size_t>(j) * n + j] = 1.0;
            for (int i = j + 1; i < n; ++i) a[static_cast<size_t>(i) * n + j] *= inv;
        }
        // blocked trailing update
        const int m = n - (k0 + nb);
        if (m <= 0) continue;
        w.assign(static_cast<size_t>(m) * nb, 0.0);
        pt.assign(static_cast<size_t>(nb) * m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* arow = a + static_cast<size_t>(k0 + nb + i) * n + k0;
            double* wrow = w.data() + static_cast<size_t>(i) * nb;
            for (int t = 0; t < nb; ++t) wrow[t] = arow[t] * d[k0 + t];
        }
        for (int t = 0; t < nb; ++t) {
            double* ptrow = pt.data() + static_cast<size_t>(t) * m;
            for (int i = 0; i < m; ++i) ptrow[i] = a[static_cast<size_t>(k0 + nb + i) * n + k0 + t];
        }
        syrk_update_lower(a + static_cast<size_t>(k0 + nb) * n + (k0 + nb), n, m, nb,
                          w.data(), pt.data());
    }
    return clamped;
}

void ldl_solve(const double* a, int n, const double* d, double* b) {
    for (int i = 0; i < n; ++i) {
        const double* ai = a + static_cast<size_t>(i) * n;
        double acc = b[i];
        for (int j = 0; j < i; ++j) acc -= ai[j] * b[j];
        b[i] = acc;
    }
    for (int i = 0; i < n; ++i) b[i] /= d[i];
    for (int i = n - 1; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < n; ++j) acc -= a[static_cast<size_t>(j) * n + i] * b[j];
        b[i] = acc;
    }
}

JacobiResult jacobi_eig(double* a, int n, double* w, Matrix& v, double rel_tol,
                        int max_sweeps) {
    v = Matrix::identity(n);
    JacobiResult res;
    if (n == 1) {
        w[0] = a[0];
        res.converged = true;
        return res;
    }
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a[static_cast<size_t>(i) * n + j]));
    const double stop = rel_tol * std::max(1.0, scale);

    auto off_max = [&]() {
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                m = std::max(m, std::fabs(a[static_cast<size_t>(i) * n + j]));
        return m;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_max() <= stop) {
            res.converged = true;
            break;
        }
        ++res.sweeps;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<size_t>(p) * n + q];
                if (std::fabs(apq) <= stop * 1e-2) continue;
                const double app = a[static_cast<size_t>(p) * n + p];
                const double aqq = a[static_cast<size_t>(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // rows/cols p and q of A
                for (int k = 0; k < n; ++k) {
                    const double akp = a[static_cast<size_t>(k) * n + p];
                    const double akq = a[static_cast<size_t>(k) * n + q];
                    a[static_cast<size_t>(k) * n + p] = c * akp - s * akq;
                    a[static_cast<size_t>(k) * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[static_cast<size_t>(p) * n + k];
                    const double aqk = a[static_cast<size_t>(q) * n + k];
                    a[static_cast<size_t>(p) * n + k] = c * apk - s * aqk;
                    a[static_cast<size_t>(q) * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!res.converged && off_max() <= stop) res.converged = true;
    for (int i = 0; i < n; ++i) w[i] = a[static_cast<size_t>(i) * n + i];
    return res;
}

void solve_upper(const double* u, int n, double* x) {
    for (int i = n - 1; i >= 0; --i) {
        double acc = x[i];
        const double* ui = u + static_cast<size_t>(i) * n;
        for (int j = i + 1; j < n; ++j) acc -= ui[j] * x[j];
        x[i] = acc / ui[i];
    }
}

void solve_upper_t(const double* u, int n, double* x) {
    for (int i = 0; i < n; ++i) {
        double acc = x[i];
        for (int j = 0; j < i; ++j) acc -= u[static_cast<size_t>(j) * n + i] * x[j];
        x[i] = acc / u[static_cast<size_t>(i) * n + i];
    }
}

} // namespace dense
} // namespace cbp

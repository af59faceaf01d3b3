#include "cbp/expr.hpp"

#include <algorithm>
#include <cmath>

namespace cbp {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

LinExpr& LinExpr::operator*=(double s) {
    if (s == 0.0) {
        terms.clear();
        constant = 0.0;
        return *this;
    }
    for (auto& t : terms) t.second *= s;
    constant *= s;
    return *this;
}

void LinExpr::compress() {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t out = 0;
    for (size_t i = 0; i < terms.size();) {
        int var = terms[i].first;
        double coeff = 0.0;
        while (i < terms.size() && terms[i].first == var) coeff += terms[i++].second;
        if (coeff != 0.0) terms[out++] = {var, coeff};
    }
    terms.resize(out);
}

LinExpr operator+(LinExpr a, const LinExpr& b) {
    a += b;
    return a;
}

LinExpr operator*(double s, LinExpr e) {
    e *= s;
    return e;
}

LinExpr AffineMatrix::contract(const SymMat& e) const {
    LinExpr out;
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j) {
            const double w = (i == j) ? e(i, i) : 2.0 * e(i, j);
            if (w == 0.0) continue;
            LinExpr term = at(i, j);
            term *= w;
            out += term;
        }
    out.compress();
    return out;
}

LinExpr AffineMatrix::quad_form(std::span<const double> v) const {
    LinExpr out;
    for (int i = 0; i < n_; ++i) {
        if (v[i] == 0.0) continue;
        for (int j = i; j < n_; ++j) {
            if (v[j] == 0.0) continue;
            const double w = (i == j) ? v[i] * v[i] : 2.0 * v[i] * v[j];
            LinExpr term = at(i, j);
            term *= w;
            out += term;
        }
    }
    out.compress();
    return out;
}

AffineMatrix AffineMatrix::congruence(const Matrix& u) const {
    AffineMatrix out(u.cols);
    for (int a = 0; a < u.cols; ++a)
        for (int b = a; b < u.cols; ++b) {
            LinExpr e;
            for (int i = 0; i < n_; ++i) {
                const double uia = u(i, a);
                if (uia == 0.0) continue;
                for (int j = 0; j < n_; ++j) {
                    const double w = uia * u(j, b);
                    if (w == 0.0) continue;
                    LinExpr term = at(i, j);
                    term *= w;
                    e += term;
                }
            }
            e.compress();
            out.set(a, b, std::move(e));
        }
    return out;
}

int ProblemBuilder::add_free() {
    kind_.push_back(VK::Free);
    cone_of_.push_back(-1);
    perm_.clear();
    return static_cast<int>(kind_.size()) - 1;
}

int ProblemBuilder::add_nonneg(int count) {
    const int first = static_cast<int>(kind_.size());
    const int ci = static_cast<int>(cones_.size());
    cones_.push_back(ConeSpec::nonneg(count));
    cone_first_.push_back(first);
    for (int i = 0; i < count; ++i) {
        kind_.push_back(VK::Cone);
        cone_of_.push_back(ci);
    }
    perm_.clear();
    return first;
}

int ProblemBuilder::add_rotated_soc(int dim) {
    const int first = static_cast<int>(kind_.size());
    const int ci = static_cast<int>(cones_.size());
    cones_.push_back(ConeSpec::rotated_soc(dim));
    cone_first_.push_back(first);
    for (int i = 0; i < dim; ++i) {
        kind_.push_back(VK::Cone);
        cone_of_.push_back(ci);
    }
    perm_.clear();
    return first;
}

std::pair<int, int> ProblemBuilder::add_psd(int order) {
    const int first = static_cast<int>(kind_.size());
    const int ci = static_cast<int>(cones_.size());
    cones_.push_back(ConeSpec::psd(order));
    cone_first_.push_back(first);
    for (int i = 0; i < svec_dim(order); ++i) {
        kind_.push_back(VK::Cone);
        cone_of_.push_back(ci);
    }
    perm_.clear();
    return {ci, first};
}

void ProblemBuilder::add_eq(const LinExpr& e, double rhs) {
    LinExpr c = e;
    c.compress();
    eqs_.emplace_back(std::move(c), rhs - e.constant);
    eqs_.back().first.constant = 0.0;
}

void ProblemBuilder::add_ineq_ge0(const LinExpr& e) {
    const int slack = add_nonneg(1);
    LinExpr c = e;
    c.add(slack, -1.0);
    add_eq(c, 0.0);
}

void ProblemBuilder::set_objective(const LinExpr& e, bool maximize) {
    obj_ = e;
    obj_.compress();
    maximize_ = maximize;
}

void ProblemBuilder::ensure_perm() const {
    if (!perm_.empty() || kind_.empty()) return;
    const int n = static_cast<int>(kind_.size());
    perm_.assign(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v)
        if (kind_[v] == VK::Free) perm_[v] = next++;
    // cone blocks, in creation order
    for (size_t ci = 0; ci < cones_.size(); ++ci) {
        const int first = cone_first_[ci];
        for (int k = 0; k < cones_[ci].dim(); ++k) perm_[first + k] = next++;
    }
}

ConicProblem ProblemBuilder::build() const {
    ensure_perm();
    ConicProblem p;
    p.num_free = 0;
    for (auto k : kind_)
        if (k == VK::Free) ++p.num_free;
    p.cones = cones_;
    p.c.assign(kind_.size(), 0.0);
    const double sgn = maximize_ ? -1.0 : 1.0;
    for (const auto& t : obj_.terms) p.c[perm_[t.first]] += sgn * t.second;
    p.rows.reserve(eqs_.size());
    p.b.reserve(eqs_.size());
    for (const auto& [expr, rhs] : eqs_) {
        SparseRow row;
        for (const auto& t : expr.terms) row.add(perm_[t.first], t.second);
        p.rows.push_back(std::move(row));
        p.b.push_back(rhs);
    }
    return p;
}

double ProblemBuilder::eval(const LinExpr& e, const ConicSolution& sol) const {
    ensure_perm();
    double v = e.constant;
    for (const auto& t : e.terms) v += t.second * sol.x[perm_[t.first]];
    return v;
}

SymMat ProblemBuilder::eval_sym(const AffineMatrix& m, const ConicSolution& sol) const {
    SymMat out(m.order());
    for (int i = 0; i < m.order(); ++i)
        for (int j = i; j < m.order(); ++j) out.set(i, j, eval(m.at(i, j), sol));
    return out;
}

double ProblemBuilder::objective_value(const ConicSolution& sol) const {
    return eval(obj_, sol);
}

double ProblemBuilder::value_of(int v, const ConicSolution& sol) const {
    ensure_perm();
    return sol.x[perm_[v]];
}

} // namespace cbp

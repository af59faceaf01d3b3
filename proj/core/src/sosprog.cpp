#include "cbp/sosprog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace cbp {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865476;
}

int degree_of(const Exponents& e) {
    int d = 0;
    for (int v : e) d += v;
    return d;
}

bool grlex_less(const Exponents& a, const Exponents& b) {
    const int da = degree_of(a), db = degree_of(b);
    if (da != db) return da < db;
    // within a degree, larger exponent vector (lexicographically) first
    return a > b;
}

namespace {

void enumerate_exact(int num_vars, int degree, int var, Exponents& cur,
                     std::vector<Exponents>& out) {
    if (var == num_vars - 1) {
        cur[var] = degree;
        out.push_back(cur);
        cur[var] = 0;
        return;
    }
    for (int d = degree; d >= 0; --d) {
        cur[var] = d;
        enumerate_exact(num_vars, degree - d, var + 1, cur, out);
    }
    cur[var] = 0;
}

} // namespace

MonomialBasis MonomialBasis::exact(int num_vars, int degree) {
    if (num_vars < 1 || degree < 0) throw InvalidInput("MonomialBasis: bad arguments");
    MonomialBasis b;
    b.num_vars_ = num_vars;
    b.degree_ = degree;
    b.mode_ = Mode::ExactDegree;
    Exponents cur(num_vars, 0);
    enumerate_exact(num_vars, degree, 0, cur, b.elems_);
    std::sort(b.elems_.begin(), b.elems_.end(), grlex_less);
    return b;
}

MonomialBasis MonomialBasis::up_to(int num_vars, int degree) {
    if (num_vars < 1 || degree < 0) throw InvalidInput("MonomialBasis: bad arguments");
    MonomialBasis b;
    b.num_vars_ = num_vars;
    b.degree_ = degree;
    b.mode_ = Mode::UpToDegree;
    Exponents cur(num_vars, 0);
    for (int d = 0; d <= degree; ++d) enumerate_exact(num_vars, d, 0, cur, b.elems_);
    std::sort(b.elems_.begin(), b.elems_.end(), grlex_less);
    return b;
}

Polynomial Polynomial::constant(int num_vars, double c) {
    Polynomial p(num_vars);
    p.add_term(Exponents(num_vars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int num_vars, int var, int power, double coeff) {
    if (var < 0 || var >= num_vars) throw InvalidInput("Polynomial::variable: index");
    Polynomial p(num_vars);
    Exponents e(num_vars, 0);
    e[var] = power;
    p.add_term(e, coeff);
    return p;
}

int Polynomial::total_degree() const {
    int d = 0;
    for (const auto& [e, c] : t_) d = std::max(d, degree_of(e));
    return d;
}

bool Polynomial::is_homogeneous() const {
    if (t_.empty()) return true;
    const int d = degree_of(t_.begin()->first);
    for (const auto& [e, c] : t_)
        if (degree_of(e) != d) return false;
    return true;
}

double Polynomial::coeff(const Exponents& e) const {
    auto it = t_.find(e);
    return it == t_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponents& e, double c) {
    if (static_cast<int>(e.size()) != n_)
        throw InvalidInput("Polynomial::add_term: exponent length mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = t_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) t_.erase(it);
    }
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : t_) m = std::max(m, std::fabs(c));
    return m;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (o.n_ != n_) throw InvalidInput("Polynomial +=: variable count mismatch");
    for (const auto& [e, c] : o.t_) add_term(e, c);
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        t_.clear();
        return *this;
    }
    for (auto& [e, c] : t_) c *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.n_ != b.n_) throw InvalidInput("Polynomial *: variable count mismatch");
    Polynomial out(a.n_);
    Exponents e(a.n_);
    for (const auto& [ea, ca] : a.t_)
        for (const auto& [eb, cb] : b.t_) {
            for (int i = 0; i < a.n_; ++i) e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    return out;
}

Polynomial Polynomial::pow(int r) const {
    if (r < 0) throw InvalidInput("Polynomial::pow: negative power");
    Polynomial out = Polynomial::constant(n_, 1.0);
    for (int i = 0; i < r; ++i) out = out * (*this);
    return out;
}

double Polynomial::eval(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& [e, c] : t_) {
        double m = c;
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < e[i]; ++k) m *= x[i];
        acc += m;
    }
    return acc;
}

std::string Polynomial::to_string() const {
    if (t_.empty()) return "0";
    std::vector<Exponents> order;
    order.reserve(t_.size());
    for (const auto& [e, c] : t_) order.push_back(e);
    std::sort(order.begin(), order.end(), grlex_less);
    std::ostringstream os;
    bool first = true;
    for (const auto& e : order) {
        if (!first) os << " + ";
        first = false;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", coeff(e));
        os << buf;
        if (degree_of(e) > 0) {
            os << " *";
            for (int i = 0; i < n_; ++i) {
                if (e[i] == 0) continue;
                os << " x" << (i + 1);
                if (e[i] > 1) os << "^" << e[i];
            }
        }
    }
    return os.str();
}

Polynomial Polynomial::parse(const std::string& text, int num_vars) {
    struct Term {
        double coeff = 1.0;
        bool has_coeff = false;
        std::vector<std::pair<int, int>> powers;  // (1-based var, exponent)
    };
    std::vector<Term> terms;
    int max_var = 0;

    std::string cleaned;
    cleaned.reserve(text.size());
    for (char ch : text) cleaned.push_back(ch == '*' ? ' ' : ch);

    size_t pos = 0;
    const auto skip_ws = [&]() {
        while (pos < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[pos])))
            ++pos;
    };
    while (true) {
        skip_ws();
        if (pos >= cleaned.size()) break;
        Term term;
        bool any = false;
        while (true) {
            skip_ws();
            if (pos >= cleaned.size() || cleaned[pos] == '+') break;
            if (cleaned[pos] == 'x' || cleaned[pos] == 'X') {
                ++pos;
                size_t start = pos;
                while (pos < cleaned.size() && std::isdigit(static_cast<unsigned char>(cleaned[pos])))
                    ++pos;
                if (start == pos) throw ParseError("polynomial: variable index expected");
                const int var = std::stoi(cleaned.substr(start, pos - start));
                int e = 1;
                if (pos < cleaned.size() && cleaned[pos] == '^') {
                    ++pos;
                    size_t es = pos;
                    while (pos < cleaned.size() &&
                           std::isdigit(static_cast<unsigned char>(cleaned[pos])))
                        ++pos;
                    if (es == pos) throw ParseError("polynomial: exponent expected after ^");
                    e = std::stoi(cleaned.substr(es, pos - es));
                }
                if (var < 1) throw ParseError("polynomial: variables are 1-based");
                term.powers.emplace_back(var, e);
                max_var = std::max(max_var, var);
                any = true;
            } else {
                size_t consumed = 0;
                double v;
                try {
                    v = std::stod(cleaned.substr(pos), &consumed);
                } catch (const std::exception&) {
                    throw ParseError("polynomial: cannot parse term near '" +
                                     cleaned.substr(pos, 12) + "'");
                }
                if (consumed == 0) throw ParseError("polynomial: cannot parse term");
                pos += consumed;
                term.coeff *= v;
                term.has_coeff = true;
                any = true;
            }
        }
        if (any) terms.push_back(std::move(term));
        if (pos < cleaned.size() && cleaned[pos] == '+') ++pos;
    }

    const int n = num_vars >= 0 ? num_vars : max_var;
    if (max_var > n) throw ParseError("polynomial: variable index exceeds num_vars");
    Polynomial p(std::max(n, 1));
    for (const auto& term : terms) {
        Exponents e(p.num_vars(), 0);
        for (const auto& [var, ex] : term.powers) e[var - 1] += ex;
        p.add_term(e, term.coeff);
    }
    return p;
}

GramSystem gram_identify(const Polynomial& p, const MonomialBasis& basis) {
    if (p.num_vars() != basis.num_vars())
        throw InvalidInput("gram_identify: variable count mismatch");
    if (p.total_degree() > 2 * basis.degree())
        throw DegreeMismatch("gram_identify: polynomial degree exceeds 2 * basis degree");
    if (basis.mode() == MonomialBasis::Mode::ExactDegree) {
        if (!p.is_homogeneous() ||
            (!p.is_zero() && p.total_degree() != 2 * basis.degree()))
            throw DegreeMismatch(
                "gram_identify: exact-degree basis requires a homogeneous polynomial "
                "of matching degree");
    }
    const int nb = basis.size();
    std::map<Exponents, int> row_of;
    GramSystem sys;
    Exponents prod(basis.num_vars());
    for (int j = 0; j < nb; ++j)
        for (int i = 0; i <= j; ++i) {
            const Exponents& zi = basis.at(i);
            const Exponents& zj = basis.at(j);
            for (int v = 0; v < basis.num_vars(); ++v) prod[v] = zi[v] + zj[v];
            auto [it, inserted] = row_of.emplace(prod, static_cast<int>(sys.rows.size()));
            if (inserted) {
                GramSystem::Row row;
                row.monomial = prod;
                row.rhs = p.coeff(prod);
                sys.rows.push_back(std::move(row));
            }
            sys.rows[it->second].pairs.emplace_back(i, j);
        }
    // every monomial of p must be expressible as a basis product
    for (const auto& [e, c] : p.terms())
        if (!row_of.count(e))
            throw DegreeMismatch("gram_identify: monomial of p outside the product span");
    return sys;
}

const char* to_string(GramFamily f) {
    switch (f) {
        case GramFamily::DD: return "dd";
        case GramFamily::SDD: return "sdd";
        case GramFamily::PSD: return "psd";
    }
    return "?";
}

Polynomial GramCertificate::reconstruct() const {
    const SymMat g = congruence(u.u, q);
    const int nb = basis.size();
    Polynomial out(basis.num_vars());
    Exponents prod(basis.num_vars());
    for (int j = 0; j < nb; ++j)
        for (int i = 0; i <= j; ++i) {
            const double w = (i == j) ? g(i, i) : 2.0 * g(i, j);
            if (w == 0.0) continue;
            const Exponents& zi = basis.at(i);
            const Exponents& zj = basis.at(j);
            for (int v = 0; v < basis.num_vars(); ++v) prod[v] = zi[v] + zj[v];
            out.add_term(prod, w);
        }
    return out;
}

namespace {

bool basis_is_identity(const Matrix& u) {
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.cols; ++j)
            if (u(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

struct GramProgram {
    ProblemBuilder pb;
    AffineMatrix q;      // the Gram-side matrix
    AffineMatrix m;      // U^T Q U (aliases q when U = I)
    std::vector<int> psd_vars;  // for the PSD family: first svec var
    int psd_cone = -1;
};

GramProgram make_gram_program(const MonomialBasis& basis, const BasisMatrix& u,
                              GramFamily family) {
    GramProgram gp;
    const int nb = basis.size();
    if (family == GramFamily::PSD) {
        auto [cone, first] = gp.pb.add_psd(nb);
        gp.psd_cone = cone;
        AffineMatrix q(nb);
        for (int j = 0; j < nb; ++j)
            for (int i = 0; i <= j; ++i)
                q.set(i, j, LinExpr::var(first + svec_index(i, j),
                                         i == j ? 1.0 : kInvSqrt2));
        gp.q = std::move(q);
    } else {
        auto blk = emit_inner_membership(gp.pb, u,
                                         family == GramFamily::DD ? Family::DD
                                                                  : Family::SDD);
        gp.q = std::move(blk.q);
    }
    gp.m = basis_is_identity(u.u) ? gp.q : gp.q.congruence(u.u);
    return gp;
}

LinExpr row_expr(const AffineMatrix& m, const GramSystem::Row& row) {
    LinExpr e;
    for (const auto& [i, j] : row.pairs) {
        LinExpr t = m.at(i, j);
        t *= (i == j) ? 1.0 : 2.0;
        e += t;
    }
    e.compress();
    return e;
}

} // namespace

CertifyResult certify(const Polynomial& p, const MonomialBasis& basis,
                      const BasisMatrix& u, GramFamily family, const SolverOptions& opts) {
    if (u.order() != basis.size())
        throw InvalidInput("certify: basis size and U order differ");
    const GramSystem sys = gram_identify(p, basis);
    GramProgram gp = make_gram_program(basis, u, family);
    LinExpr obj;
    for (int i = 0; i < basis.size(); ++i) obj += gp.q.at(i, i);
    gp.pb.set_objective(obj);  // minimal trace keeps the feasibility solve bounded
    for (const auto& row : sys.rows) gp.pb.add_eq(row_expr(gp.m, row), row.rhs);

    CertifyResult res;
    res.solution = solve(gp.pb.build(), opts);
    if (res.solution.status == SolveStatus::Optimal) {
        res.feasible = true;
        GramCertificate cert;
        cert.basis = basis;
        cert.u = u;
        cert.q = gp.pb.eval_sym(gp.q, res.solution);
        cert.family = family;
        res.certificate = std::move(cert);
    } else if (res.solution.status != SolveStatus::PrimalInfeasible) {
        throw SolverFailure(std::string("certify: solver status ") +
                            to_string(res.solution.status));
    }
    return res;
}

EpsResult optimize_eps(const Polynomial& p, const Polynomial& w,
                       const MonomialBasis& basis, const BasisMatrix& u,
                       GramFamily family, const SolverOptions& opts) {
    if (u.order() != basis.size())
        throw InvalidInput("optimize_eps: basis size and U order differ");
    const GramSystem sys = gram_identify(p, basis);
    // w must live in the same product span
    gram_identify(w, basis);
    GramProgram gp = make_gram_program(basis, u, family);
    const int eps = gp.pb.add_free();
    for (const auto& row : sys.rows) {
        LinExpr e = row_expr(gp.m, row);
        const double wc = w.coeff(row.monomial);
        if (wc != 0.0) e.add(eps, wc);
        gp.pb.add_eq(e, row.rhs);
    }
    gp.pb.set_objective(LinExpr::var(eps), /*maximize=*/true);
    const auto sol = solve(gp.pb.build(), opts);

    EpsResult res;
    res.status = sol.status;
    res.solver_iterations = sol.iterations;
    res.gap = sol.gap;
    if (sol.status == SolveStatus::Optimal) {
        res.eps = gp.pb.objective_value(sol);
        res.dual_value = -sol.dual_obj;
        GramCertificate cert;
        cert.basis = basis;
        cert.u = u;
        cert.q = gp.pb.eval_sym(gp.q, sol);
        cert.family = family;
        res.certificate = std::move(cert);
    }
    return res;
}

IterationTrace poly_inner_sequence(const Polynomial& p, const Polynomial& w,
                                   const MonomialBasis& basis, const PursuitConfig& cfg,
                                   std::optional<double> stop_above) {
    IterationTrace trace;
    BasisMatrix basis_u = BasisMatrix::identity(basis.size());
    const GramFamily family = to_gram(cfg.family);

    for (int k = 0; k < cfg.max_iter; ++k) {
        const EpsResult step = optimize_eps(p, w, basis, basis_u, family, cfg.solver);

        IterationRecord rec;
        rec.k = k;
        rec.basis_source = basis_u.source;
        rec.chol_shift = basis_u.shift;
        rec.solve_status = step.status;
        rec.solver_iterations = step.solver_iterations;
        rec.gap = step.gap;
        if (step.status != SolveStatus::Optimal) {
            if (k == 0 && step.status == SolveStatus::PrimalInfeasible)
                throw InfeasibleStart("poly_inner_sequence: iteration 0 infeasible");
            trace.records.push_back(rec);
            trace.status = step.status == SolveStatus::PrimalInfeasible
                               ? IterationTrace::Terminal::Infeasible
                               : IterationTrace::Terminal::NumericalTrouble;
            if (trace.status == IterationTrace::Terminal::Infeasible)
                trace.infeasible_at = k;
            return trace;
        }
        rec.value = step.eps;
        rec.dual_value = step.dual_value;
        trace.records.push_back(rec);

        if (stop_above && step.eps > *stop_above) {
            trace.refuted = true;
            trace.refuted_at = k;
            trace.status = IterationTrace::Terminal::Converged;
            return trace;
        }
        if (k > 0) {
            const double prev = trace.records[k - 1].value;
            if (std::fabs(step.eps - prev) <= cfg.rel_improve_tol * (1.0 + std::fabs(prev))) {
                trace.status = IterationTrace::Terminal::Converged;
                return trace;
            }
        }
        if (k + 1 == cfg.max_iter) break;

        // U_{k+1} = chol(U_k^T Q_k U_k)
        const SymMat g = congruence(basis_u.u, step.certificate->q);
        const double reg = default_chol_reg(g);
        CholeskyResult ch;
        try {
            ch = cholesky(g, reg);
        } catch (const NotFactorizable&) {
            trace.status = IterationTrace::Terminal::NumericalTrouble;
            return trace;
        }
        basis_u.u = ch.factor.m;
        basis_u.source = BasisMatrix::Source::CholeskyOfPrimal;
        basis_u.iteration = k + 1;
        basis_u.shift = ch.shift;
    }
    trace.status = IterationTrace::Terminal::MaxIter;
    return trace;
}

} // namespace cbp

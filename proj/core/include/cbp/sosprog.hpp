#pragma once

#include <map>
#include <optional>
#include <string>

#include "cbp/trace.hpp"

namespace cbp {

/// Exponent vector of a monomial; length equals the variable count.
using Exponents = std::vector<int>;

int degree_of(const Exponents& e);

/// Graded-lexicographic order: lower total degree first, then
/// lexicographically larger exponent vector first (x1^2 before x1*x2
/// before x2^2).
bool grlex_less(const Exponents& a, const Exponents& b);

/// Ordered monomial list z(x, d): either all monomials of degree
/// exactly d or all of degree <= d, in graded-lexicographic order.
class MonomialBasis {
public:
    enum class Mode : unsigned char { ExactDegree, UpToDegree };

    static MonomialBasis exact(int num_vars, int degree);
    static MonomialBasis up_to(int num_vars, int degree);

    int num_vars() const { return num_vars_; }
    int degree() const { return degree_; }
    Mode mode() const { return mode_; }
    int size() const { return static_cast<int>(elems_.size()); }
    const std::vector<Exponents>& elements() const { return elems_; }
    const Exponents& at(int i) const { return elems_[static_cast<size_t>(i)]; }

private:
    int num_vars_ = 0;
    int degree_ = 0;
    Mode mode_ = Mode::ExactDegree;
    std::vector<Exponents> elems_;
};

/// Sparse multivariate polynomial; zero coefficients are never stored.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int num_vars) : n_(num_vars) {}

    static Polynomial constant(int num_vars, double c);
    static Polynomial variable(int num_vars, int var, int power = 1, double coeff = 1.0);

    int num_vars() const { return n_; }
    const std::map<Exponents, double>& terms() const { return t_; }
    int num_terms() const { return static_cast<int>(t_.size()); }
    bool is_zero() const { return t_.empty(); }
    int total_degree() const;
    bool is_homogeneous() const;

    double coeff(const Exponents& e) const;
    void add_term(const Exponents& e, double c);
    double max_abs_coeff() const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial pow(int r) const;

    double eval(std::span<const double> x) const;

    /// Text form: terms joined by " + ", each term
    /// "coeff * x1^a1 x2^a2 ..." (power 1 printed without the hat,
    /// constant terms as the bare coefficient).
    std::string to_string() const;
    /// Parses the same grammar; negative coefficients are written as a
    /// leading '-' inside the term.  num_vars < 0 infers the count from
    /// the largest variable index used.
    static Polynomial parse(const std::string& text, int num_vars = -1);

private:
    int n_ = 0;
    std::map<Exponents, double> t_;
};

/// One linear equation per product monomial: the Q-entries (both
/// triangles) summing into that monomial must match the coefficient.
struct GramSystem {
    struct Row {
        Exponents monomial;
        /// (i, j) with i <= j: Q_ij contributes with weight 1 (i == j)
        /// or 2 (off-diagonal).
        std::vector<std::pair<int, int>> pairs;
        double rhs = 0.0;
    };
    std::vector<Row> rows;
};

/// Builds the Gram identification system of p over the basis.  Throws
/// DegreeMismatch when deg(p) exceeds twice the basis degree or an
/// exact-degree basis meets a non-homogeneous p.
GramSystem gram_identify(const Polynomial& p, const MonomialBasis& basis);

/// Gram cone for certificates: dd, sdd or plain psd.
enum class GramFamily : unsigned char { DD, SDD, PSD };

const char* to_string(GramFamily f);
inline GramFamily to_gram(Family f) {
    return f == Family::DD ? GramFamily::DD : GramFamily::SDD;
}

struct GramCertificate {
    MonomialBasis basis;
    BasisMatrix u;
    SymMat q;
    GramFamily family = GramFamily::PSD;

    /// z^T (U^T Q U) z expanded back to a polynomial.
    Polynomial reconstruct() const;
};

struct CertifyResult {
    bool feasible = false;
    std::optional<GramCertificate> certificate;
    /// Raw solve outcome; for infeasible results it carries the
    /// solver's infeasibility certificate.
    ConicSolution solution;
};

/// Decides p in family(U) over the basis by one conic solve.
CertifyResult certify(const Polynomial& p, const MonomialBasis& basis,
                      const BasisMatrix& u, GramFamily family,
                      const SolverOptions& opts = {});

struct EpsResult {
    SolveStatus status = SolveStatus::NumericalTrouble;
    double eps = 0.0;
    double dual_value = 0.0;
    std::optional<GramCertificate> certificate;
    int solver_iterations = 0;
    double gap = 0.0;
};

/// maximize eps subject to p - eps * w in family(U).
EpsResult optimize_eps(const Polynomial& p, const Polynomial& w,
                       const MonomialBasis& basis, const BasisMatrix& u,
                       GramFamily family, const SolverOptions& opts = {});

/// Iterates "maximize eps s.t. p - eps w in family(U_k)" with
/// U_{k+1} = chol(U_k^T Q_k U_k) from the optimal Gram matrix Q_k.
/// The eps trace is non-decreasing.  stop_above, when set, ends the
/// run as soon as an iterate exceeds it (used by refutation drivers).
/// Throws InfeasibleStart when iteration 0 is infeasible.
IterationTrace poly_inner_sequence(const Polynomial& p, const Polynomial& w,
                                   const MonomialBasis& basis, const PursuitConfig& cfg,
                                   std::optional<double> stop_above = std::nullopt);

} // namespace cbp

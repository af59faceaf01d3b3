#include "cbp/cones.hpp"

#include <cmath>

namespace cbp {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;
}

const char* to_string(Family f) { return f == Family::DD ? "dd" : "sdd"; }

const char* to_string(BasisMatrix::Source s) {
    switch (s) {
        case BasisMatrix::Source::Identity: return "identity";
        case BasisMatrix::Source::CholeskyOfPrimal: return "cholesky-of-primal";
        case BasisMatrix::Source::CholeskyOfDualSlack: return "cholesky-of-dual-slack";
    }
    return "?";
}

std::vector<ExtremeRay> dd_extreme_rays(int n) {
    if (n < 1) throw InvalidInput("dd_extreme_rays: n must be >= 1");
    std::vector<ExtremeRay> rays;
    rays.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) rays.push_back({n, i, -1, 1, 1});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            rays.push_back({n, i, j, 1, 1});
            rays.push_back({n, i, j, 1, -1});
        }
    return rays;
}

std::vector<BlockSelector> sdd_block_selectors(int n) {
    if (n < 1) throw InvalidInput("sdd_block_selectors: n must be >= 1");
    std::vector<BlockSelector> sel;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) sel.push_back({n, i, j});
    return sel;
}

BasisMatrix BasisMatrix::identity(int n) {
    BasisMatrix b;
    b.u = Matrix::identity(n);
    b.source = Source::Identity;
    b.iteration = 0;
    b.shift = 0.0;
    return b;
}

namespace {

bool is_identity(const Matrix& u) {
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.cols; ++j)
            if (u(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

// Q parametrized over the dd cone:
//   Q_ii = s_i + sum_{j != i} (tp_ij + tm_ij)
//   Q_ij = tp_ij - tm_ij
// with s, tp, tm >= 0; this realizes Q_ii - sum t_ij >= 0 and
// -t_ij <= Q_ij <= t_ij in standard form without extra rows.
void dd_gram(ProblemBuilder& pb, int n, InnerMembershipBlock& blk) {
    AffineMatrix q(n);
    blk.dd_diag.resize(n);
    for (int i = 0; i < n; ++i) blk.dd_diag[i] = pb.add_nonneg(1);
    for (int i = 0; i < n; ++i) q.set(i, i, LinExpr::var(blk.dd_diag[i]));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int tp = pb.add_nonneg(1);
            const int tm = pb.add_nonneg(1);
            blk.dd_off.emplace_back(tp, tm);
            LinExpr off = LinExpr::var(tp);
            off.add(tm, -1.0);
            q.set(i, j, off);
            q.at(i, i).add(tp, 1.0).add(tm, 1.0);
            q.at(j, j).add(tp, 1.0).add(tm, 1.0);
        }
    blk.q = std::move(q);
}

// Q as a sum of 2x2 psd principal blocks, one rotated cone per pair.
void sdd_gram(ProblemBuilder& pb, int n, InnerMembershipBlock& blk) {
    AffineMatrix q(n);
    if (n == 1) {
        const int v = pb.add_nonneg(1);
        blk.sdd_pairs.push_back(v);
        q.set(0, 0, LinExpr::var(v));
        blk.q = std::move(q);
        return;
    }
    for (int i = 0; i < n; ++i) q.set(i, i, LinExpr{});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int v = pb.add_rotated_soc(3);  // (u1, u2, w): 2 u1 u2 >= w^2
            blk.sdd_pairs.push_back(v);
            q.at(i, i).add(v, 1.0);
            q.at(j, j).add(v + 1, 1.0);
            q.set(i, j, LinExpr::var(v + 2, kInvSqrt2));
        }
    blk.q = std::move(q);
}

LinExpr bilinear_form(const AffineMatrix& x, const std::vector<double>& u,
                      const std::vector<double>& v) {
    LinExpr out;
    const int n = x.order();
    for (int a = 0; a < n; ++a) {
        if (u[a] == 0.0 && v[a] == 0.0) continue;
        for (int b = a; b < n; ++b) {
            const double w = (a == b) ? u[a] * v[a] : u[a] * v[b] + u[b] * v[a];
            if (w == 0.0) continue;
            LinExpr term = x.at(a, b);
            term *= w;
            out += term;
        }
    }
    out.compress();
    return out;
}

std::vector<double> u_row(const Matrix& u, int i) {
    std::vector<double> r(u.cols);
    for (int k = 0; k < u.cols; ++k) r[k] = u(i, k);
    return r;
}

} // namespace

InnerMembershipBlock emit_inner_membership(ProblemBuilder& pb, const BasisMatrix& u,
                                           Family family) {
    const int n = u.order();
    InnerMembershipBlock blk;
    if (family == Family::DD) dd_gram(pb, n, blk);
    else sdd_gram(pb, n, blk);
    blk.m = is_identity(u.u) ? blk.q : blk.q.congruence(u.u);
    return blk;
}

void emit_outer_membership(ProblemBuilder& pb, const BasisMatrix& u, Family family,
                           const AffineMatrix& x) {
    const int n = u.order();
    if (x.order() != n) throw InvalidInput("emit_outer_membership: order mismatch");
    if (family == Family::DD) {
        for (const auto& ray : dd_extreme_rays(n)) {
            // v^T (U X U^T) v = (U^T v)^T X (U^T v); U^T v combines rows of U
            std::vector<double> uv = u_row(u.u, ray.i);
            if (ray.si < 0)
                for (double& t : uv) t = -t;
            if (ray.j >= 0) {
                const auto rj = u_row(u.u, ray.j);
                for (int k = 0; k < n; ++k) uv[k] += ray.sj * rj[k];
            }
            pb.add_ineq_ge0(x.quad_form(uv));
        }
    } else {
        if (n == 1) {
            pb.add_ineq_ge0(x.at(0, 0));
            return;
        }
        for (const auto& sel : sdd_block_selectors(n)) {
            const auto ui = u_row(u.u, sel.i);
            const auto uj = u_row(u.u, sel.j);
            const int v = pb.add_rotated_soc(3);
            LinExpr a = x.quad_form(ui);
            a.add(v, -1.0);
            pb.add_eq(a, 0.0);
            LinExpr c = x.quad_form(uj);
            c.add(v + 1, -1.0);
            pb.add_eq(c, 0.0);
            LinExpr bfrm = bilinear_form(x, ui, uj);
            bfrm *= kSqrt2;
            bfrm.add(v + 2, -1.0);
            pb.add_eq(bfrm, 0.0);
        }
    }
}

SymMat ConeDecomposition::reassemble(const BasisMatrix& u) const {
    const int n = dimension;
    SymMat out(n);
    if (family == Family::DD) {
        const auto rays = dd_extreme_rays(n);
        for (size_t r = 0; r < rays.size(); ++r) {
            const double w = ray_weights[r];
            if (w == 0.0) continue;
            auto uv = u_row(u.u, rays[r].i);
            if (rays[r].si < 0)
                for (double& t : uv) t = -t;
            if (rays[r].j >= 0) {
                const auto rj = u_row(u.u, rays[r].j);
                for (int k = 0; k < n; ++k) uv[k] += rays[r].sj * rj[k];
            }
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) out.add(a, b, w * uv[a] * uv[b]);
        }
    } else {
        if (n == 1) {
            out.set(0, 0, blocks.empty() ? 0.0 : blocks[0](0, 0));
            return out;
        }
        const auto sels = sdd_block_selectors(n);
        for (size_t p = 0; p < sels.size(); ++p) {
            const auto ui = u_row(u.u, sels[p].i);
            const auto uj = u_row(u.u, sels[p].j);
            const SymMat& L = blocks[p];
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b)
                    out.add(a, b, L(0, 0) * ui[a] * ui[b] + L(1, 1) * uj[a] * uj[b] +
                                      L(0, 1) * (ui[a] * uj[b] + uj[a] * ui[b]));
        }
    }
    return out;
}

ConeDecomposition decompose(const SymMat& m, const BasisMatrix& u, Family family,
                            const SolverOptions& opts) {
    const int n = m.order();
    if (u.order() != n) throw InvalidInput("decompose: order mismatch");
    ProblemBuilder pb;
    InnerMembershipBlock blk = emit_inner_membership(pb, u, family);
    LinExpr obj;
    for (int i = 0; i < n; ++i) obj += blk.q.at(i, i);
    pb.set_objective(obj);  // smallest total diagonal keeps the solve bounded
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) pb.add_eq(blk.m.at(i, j), m(i, j));
    auto sol = solve(pb.build(), opts);
    if (sol.status == SolveStatus::PrimalInfeasible)
        throw NotInCone("decompose: matrix is not in the requested cone");
    if (sol.status != SolveStatus::Optimal)
        throw SolverFailure(std::string("decompose: solver status ") + to_string(sol.status));

    ConeDecomposition out;
    out.family = family;
    out.dimension = n;
    if (family == Family::DD) {
        // the parametrization's variables are exactly the ray weights:
        // s_i for the singleton e_i, t+/t- for e_i + e_j / e_i - e_j
        out.ray_weights.reserve(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            out.ray_weights.push_back(std::max(0.0, pb.value_of(blk.dd_diag[i], sol)));
        for (const auto& [tp, tm] : blk.dd_off) {
            out.ray_weights.push_back(std::max(0.0, pb.value_of(tp, sol)));
            out.ray_weights.push_back(std::max(0.0, pb.value_of(tm, sol)));
        }
    } else if (n == 1) {
        SymMat b(1);
        b.set(0, 0, pb.value_of(blk.sdd_pairs[0], sol));
        out.blocks.push_back(b);
    } else {
        for (int v : blk.sdd_pairs) {
            SymMat b(2);
            b.set(0, 0, pb.value_of(v, sol));
            b.set(1, 1, pb.value_of(v + 1, sol));
            b.set(0, 1, kInvSqrt2 * pb.value_of(v + 2, sol));
            out.blocks.push_back(b);
        }
    }
    return out;
}

} // namespace cbp

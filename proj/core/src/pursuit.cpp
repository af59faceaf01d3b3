#include "cbp/pursuit.hpp"

#include <cmath>

namespace cbp {

const char* to_string(Formulation f) {
    return f == Formulation::Membership ? "membership" : "corner";
}

const char* to_string(IterationTrace::Terminal t) {
    switch (t) {
        case IterationTrace::Terminal::Converged: return "Converged";
        case IterationTrace::Terminal::MaxIter: return "MaxIter";
        case IterationTrace::Terminal::Infeasible: return "Infeasible";
        case IterationTrace::Terminal::NumericalTrouble: return "NumericalTrouble";
    }
    return "?";
}

void SdpData::validate() const {
    for (const auto& [a, b] : constraints)
        if (a.order() != c.order()) throw InvalidInput("SdpData: constraint order mismatch");
}

SdpSolveResult solve_sdp(const SdpData& sdp, const SolverOptions& opts) {
    sdp.validate();
    const int n = sdp.order();
    ConicProblem p;
    p.cones.push_back(ConeSpec::psd(n));
    p.c.assign(svec_dim(n), 0.0);
    svec_pack(sdp.c, p.c.data());
    for (const auto& [a, b] : sdp.constraints) {
        SparseRow row;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i) {
                const double v = a(i, j);
                if (v == 0.0) continue;
                row.add(svec_index(i, j), i == j ? v : 1.4142135623730951 * v);
            }
        p.rows.push_back(std::move(row));
        p.b.push_back(b);
    }
    SdpSolveResult res;
    res.solution = solve(p, opts);
    if (res.solution.status == SolveStatus::Optimal) {
        res.x = extract_psd_block(res.solution, p, 0);
        res.value = res.solution.primal_obj;
    }
    return res;
}

namespace {

// Affine X for the corner form: X = sum_i alpha_i u_i u_i^T (DD) or
// X = sum_p [u_i u_j] Lambda_p [u_i u_j]^T (SDD).
AffineMatrix corner_x(ProblemBuilder& pb, const BasisMatrix& basis, Family family) {
    const int n = basis.order();
    AffineMatrix x(n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) x.set(a, b, LinExpr{});
    auto urow = [&](int i) {
        std::vector<double> r(n);
        for (int k = 0; k < n; ++k) r[k] = basis.u(i, k);
        return r;
    };
    if (family == Family::DD) {
        for (const auto& ray : dd_extreme_rays(n)) {
            auto uv = urow(ray.i);
            if (ray.si < 0)
                for (double& t : uv) t = -t;
            if (ray.j >= 0) {
                const auto rj = urow(ray.j);
                for (int k = 0; k < n; ++k) uv[k] += ray.sj * rj[k];
            }
            const int alpha = pb.add_nonneg(1);
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    const double w = uv[a] * uv[b];
                    if (w != 0.0) x.at(a, b).add(alpha, w);
                }
        }
    } else {
        if (n == 1) {
            const int v = pb.add_nonneg(1);
            x.at(0, 0).add(v, basis.u(0, 0) * basis.u(0, 0));
            return x;
        }
        for (const auto& sel : sdd_block_selectors(n)) {
            const auto ui = urow(sel.i);
            const auto uj = urow(sel.j);
            const int v = pb.add_rotated_soc(3);  // Lambda = [[v0, v2/s2],[v2/s2, v1]]
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    LinExpr& e = x.at(a, b);
                    const double wii = ui[a] * ui[b];
                    const double wjj = uj[a] * uj[b];
                    const double wij = (ui[a] * uj[b] + uj[a] * ui[b]) * 0.7071067811865476;
                    if (wii != 0.0) e.add(v, wii);
                    if (wjj != 0.0) e.add(v + 1, wjj);
                    if (wij != 0.0) e.add(v + 2, wij);
                }
        }
    }
    return x;
}

struct InnerStep {
    SolveStatus status = SolveStatus::NumericalTrouble;
    double value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    int iterations = 0;
    SymMat x;
};

InnerStep solve_inner_step(const SdpData& sdp, const BasisMatrix& basis,
                           const PursuitConfig& cfg) {
    ProblemBuilder pb;
    AffineMatrix x;
    if (cfg.formulation == Formulation::Membership) {
        auto blk = emit_inner_membership(pb, basis, cfg.family);
        x = std::move(blk.m);
    } else {
        x = corner_x(pb, basis, cfg.family);
    }
    pb.set_objective(x.contract(sdp.c));
    for (const auto& [a, b] : sdp.constraints) pb.add_eq(x.contract(a), b);
    const auto sol = solve(pb.build(), cfg.solver);
    InnerStep step;
    step.status = sol.status;
    step.iterations = sol.iterations;
    step.gap = sol.gap;
    if (sol.status == SolveStatus::Optimal) {
        step.value = sol.primal_obj;
        step.dual_value = sol.dual_obj;
        step.x = pb.eval_sym(x, sol);
    }
    return step;
}

} // namespace

Phase1Result phase1(const SdpData& sdp, const PursuitConfig& cfg) {
    sdp.validate();
    const int n = sdp.order();
    Phase1Result out;
    BasisMatrix basis = BasisMatrix::identity(n);
    for (int k = 0; k < cfg.max_iter; ++k) {
        ProblemBuilder pb;
        const int alpha_var = pb.add_free();
        auto blk = emit_inner_membership(pb, basis, cfg.family);
        // X = M - alpha I, so A_i . X = A_i . M - alpha tr(A_i)
        for (const auto& [a, b] : sdp.constraints) {
            LinExpr e = blk.m.contract(a);
            e.add(alpha_var, -a.trace());
            pb.add_eq(e, b);
        }
        pb.set_objective(LinExpr::var(alpha_var));
        const auto sol = solve(pb.build(), cfg.solver);

        IterationRecord rec;
        rec.k = k;
        rec.basis_source = basis.source;
        rec.chol_shift = basis.shift;
        rec.solve_status = sol.status;
        rec.solver_iterations = sol.iterations;
        rec.gap = sol.gap;
        if (sol.status != SolveStatus::Optimal) {
            out.trace.records.push_back(rec);
            out.trace.status = IterationTrace::Terminal::NumericalTrouble;
            return out;
        }
        const double alpha = sol.primal_obj;
        rec.value = alpha;
        rec.dual_value = sol.dual_obj;
        out.trace.records.push_back(rec);

        SymMat xk = pb.eval_sym(blk.m, sol);
        xk.add_scaled_identity(-alpha);
        if (alpha <= 0.0) {
            out.success = true;
            out.basis = basis;
            out.trace.status = IterationTrace::Terminal::Converged;
            return out;
        }
        // next basis: chol(X_k); X_k may be indefinite while alpha > 0,
        // in which case the shifted matrix X_k + alpha I (psd by
        // feasibility) is factored instead
        const double reg = default_chol_reg(xk);
        CholeskyResult ch;
        try {
            ch = cholesky(xk, reg);
        } catch (const NotFactorizable&) {
            SymMat shifted = xk;
            shifted.add_scaled_identity(alpha);
            ch = cholesky(shifted, reg);
        }
        basis.u = ch.factor.m;
        basis.source = BasisMatrix::Source::CholeskyOfPrimal;
        basis.iteration = k + 1;
        basis.shift = ch.shift;
    }
    out.trace.status = IterationTrace::Terminal::MaxIter;
    return out;
}

IterationTrace inner_sequence(const SdpData& sdp, const PursuitConfig& cfg) {
    sdp.validate();
    const int n = sdp.order();
    IterationTrace trace;
    BasisMatrix basis = BasisMatrix::identity(n);

    for (int k = 0; k < cfg.max_iter; ++k) {
        InnerStep step = solve_inner_step(sdp, basis, cfg);
        if (k == 0 && step.status == SolveStatus::PrimalInfeasible) {
            if (!cfg.phase1_fallback)
                throw InfeasibleStart("inner_sequence: iteration 0 infeasible");
            auto ph = phase1(sdp, cfg);
            if (!ph.success)
                throw InfeasibleStart(
                    "inner_sequence: iteration 0 infeasible and Phase-I did not reach "
                    "alpha <= 0");
            basis = *ph.basis;
            step = solve_inner_step(sdp, basis, cfg);
            if (step.status == SolveStatus::PrimalInfeasible)
                throw InfeasibleStart(
                    "inner_sequence: infeasible even in the Phase-I basis");
        }

        IterationRecord rec;
        rec.k = k;
        rec.basis_source = basis.source;
        rec.chol_shift = basis.shift;
        rec.solve_status = step.status;
        rec.solver_iterations = step.iterations;
        rec.gap = step.gap;
        if (step.status != SolveStatus::Optimal) {
            trace.records.push_back(rec);
            trace.status = step.status == SolveStatus::PrimalInfeasible
                               ? IterationTrace::Terminal::Infeasible
                               : IterationTrace::Terminal::NumericalTrouble;
            if (trace.status == IterationTrace::Terminal::Infeasible)
                trace.infeasible_at = k;
            return trace;
        }
        rec.value = step.value;
        rec.dual_value = step.dual_value;
        trace.records.push_back(rec);

        if (k > 0) {
            const double prev = trace.records[k - 1].value;
            if (std::fabs(prev - step.value) <= cfg.rel_improve_tol * (1.0 + std::fabs(prev))) {
                trace.status = IterationTrace::Terminal::Converged;
                return trace;
            }
        }
        if (k + 1 == cfg.max_iter) break;

        const double reg = default_chol_reg(step.x);
        CholeskyResult ch;
        try {
            ch = cholesky(step.x, reg);
        } catch (const NotFactorizable&) {
            trace.status = IterationTrace::Terminal::NumericalTrouble;
            return trace;
        }
        basis.u = ch.factor.m;
        basis.source = BasisMatrix::Source::CholeskyOfPrimal;
        basis.iteration = k + 1;
        basis.shift = ch.shift;
    }
    trace.status = IterationTrace::Terminal::MaxIter;
    return trace;
}

IterationTrace outer_sequence(const SdpData& sdp, const PursuitConfig& cfg) {
    sdp.validate();
    const int n = sdp.order();
    IterationTrace trace;
    BasisMatrix basis = BasisMatrix::identity(n);
    const int m0 = static_cast<int>(sdp.constraints.size());

    for (int k = 0; k < cfg.max_iter; ++k) {
        ProblemBuilder pb;
        AffineMatrix x(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) x.set(i, j, LinExpr::var(pb.add_free()));
        // the SDP equalities come first so their multipliers are y[0..m0)
        for (const auto& [a, b] : sdp.constraints) pb.add_eq(x.contract(a), b);
        emit_outer_membership(pb, basis, cfg.family, x);
        pb.set_objective(x.contract(sdp.c));
        const auto sol = solve(pb.build(), cfg.solver);

        IterationRecord rec;
        rec.k = k;
        rec.basis_source = basis.source;
        rec.chol_shift = basis.shift;
        rec.solve_status = sol.status;
        rec.solver_iterations = sol.iterations;
        rec.gap = sol.gap;
        if (sol.status != SolveStatus::Optimal) {
            trace.records.push_back(rec);
            trace.status = sol.status == SolveStatus::PrimalInfeasible
                               ? IterationTrace::Terminal::Infeasible
                               : IterationTrace::Terminal::NumericalTrouble;
            if (trace.status == IterationTrace::Terminal::Infeasible)
                trace.infeasible_at = k;
            return trace;
        }
        rec.value = sol.primal_obj;
        rec.dual_value = sol.dual_obj;
        trace.records.push_back(rec);

        if (k > 0) {
            const double prev = trace.records[k - 1].value;
            if (std::fabs(prev - sol.primal_obj) <=
                cfg.rel_improve_tol * (1.0 + std::fabs(prev))) {
                trace.status = IterationTrace::Terminal::Converged;
                return trace;
            }
        }
        if (k + 1 == cfg.max_iter) break;

        // dual slack C - sum y_i A_i drives the next basis
        SymMat slack = sdp.c;
        for (int i = 0; i < m0; ++i) {
            const double yi = sol.y[i];
            if (yi == 0.0) continue;
            SymMat t = sdp.constraints[i].first;
            t *= -yi;
            slack += t;
        }
        const double reg = default_chol_reg(slack);
        CholeskyResult ch;
        try {
            ch = cholesky(slack, reg);
        } catch (const NotFactorizable&) {
            trace.status = IterationTrace::Terminal::NumericalTrouble;
            return trace;
        }
        basis.u = ch.factor.m;
        basis.source = BasisMatrix::Source::CholeskyOfDualSlack;
        basis.iteration = k + 1;
        basis.shift = ch.shift;
    }
    trace.status = IterationTrace::Terminal::MaxIter;
    return trace;
}

std::vector<double> PencilSdp::coordinates(const SymMat& x) const {
    std::vector<double> z(readers.size(), 0.0);
    SymMat diff = x;
    SymMat neg = f0;
    neg *= -1.0;
    diff += neg;
    for (size_t k = 0; k < readers.size(); ++k) z[k] = dot(readers[k], diff);
    return z;
}

PencilSdp pencil_sdp(const SymMat& f0, const std::vector<SymMat>& fi,
                     const std::vector<double>& d) {
    const int n = f0.order();
    const int p = static_cast<int>(fi.size());
    if (static_cast<int>(d.size()) != p)
        throw InvalidInput("pencil_sdp: direction length mismatch");
    for (const auto& f : fi)
        if (f.order() != n) throw InvalidInput("pencil_sdp: order mismatch");

    // orthonormal basis of span{F_i} by Gram-Schmidt in svec space
    const int dim = svec_dim(n);
    std::vector<std::vector<double>> span;
    auto project_out = [&](std::vector<double>& v) {
        for (const auto& q : span) {
            double dp = 0.0;
            for (int t = 0; t < dim; ++t) dp += q[t] * v[t];
            for (int t = 0; t < dim; ++t) v[t] -= dp * q[t];
        }
    };
    auto norm_of = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double t : v) s += t * t;
        return std::sqrt(s);
    };
    for (const auto& f : fi) {
        std::vector<double> v(dim);
        svec_pack(f, v.data());
        project_out(v);
        const double nv = norm_of(v);
        if (nv < 1e-12) throw InvalidInput("pencil_sdp: dependent pencil matrices");
        for (double& t : v) t /= nv;
        span.push_back(std::move(v));
    }
    PencilSdp out;
    out.f0 = f0;
    out.fi = fi;
    out.sdp.c = SymMat(n);

    // readers: rows of the Gram inverse against the F basis
    Matrix gram(p, p);
    std::vector<std::vector<double>> fvec(p, std::vector<double>(dim));
    for (int i = 0; i < p; ++i) svec_pack(fi[i], fvec[i].data());
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int t = 0; t < dim; ++t) s += fvec[i][t] * fvec[j][t];
            gram(i, j) = s;
        }
    // invert the small Gram matrix by Gauss-Jordan
    Matrix ginv = Matrix::identity(p);
    {
        Matrix a = gram;
        for (int col = 0; col < p; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < p; ++r2)
                if (std::fabs(a(r2, col)) > std::fabs(a(piv, col))) piv = r2;
            if (std::fabs(a(piv, col)) < 1e-14)
                throw InvalidInput("pencil_sdp: singular Gram matrix");
            if (piv != col)
                for (int c2 = 0; c2 < p; ++c2) {
                    std::swap(a(piv, c2), a(col, c2));
                    std::swap(ginv(piv, c2), ginv(col, c2));
                }
            const double inv = 1.0 / a(col, col);
            for (int c2 = 0; c2 < p; ++c2) {
                a(col, c2) *= inv;
                ginv(col, c2) *= inv;
            }
            for (int r2 = 0; r2 < p; ++r2) {
                if (r2 == col) continue;
                const double f = a(r2, col);
                if (f == 0.0) continue;
                for (int c2 = 0; c2 < p; ++c2) {
                    a(r2, c2) -= f * a(col, c2);
                    ginv(r2, c2) -= f * ginv(col, c2);
                }
            }
        }
    }
    for (int k = 0; k < p; ++k) {
        SymMat reader(n);
        for (int l = 0; l < p; ++l) {
            SymMat t = fi[l];
            t *= ginv(k, l);
            reader += t;
        }
        out.readers.push_back(reader);
    }
    // objective C = -sum_k (Ginv d)_k F_k so that C . X = -(d . z) + const
    SymMat ctilde(n);
    for (int k = 0; k < p; ++k) {
        double w = 0.0;
        for (int l = 0; l < p; ++l) w += ginv(k, l) * d[l];
        SymMat t = fi[k];
        t *= w;
        ctilde += t;
    }
    SymMat cneg = ctilde;
    cneg *= -1.0;
    out.sdp.c = cneg;
    // min (-Ctilde).X = -(d.z) - Ctilde.F0, so d.z = -value - Ctilde.F0
    out.shift = dot(ctilde, f0);

    // equality constraints: <G_j, X> = <G_j, F0> for an orthonormal
    // complement basis of span{F_i}
    for (int unit = 0; unit < dim; ++unit) {
        std::vector<double> v(dim, 0.0);
        v[unit] = 1.0;
        project_out(v);
        const double nv = norm_of(v);
        if (nv < 1e-8) continue;
        for (double& t : v) t /= nv;
        SymMat g = svec_unpack(v.data(), n);
        const double rhs = dot(g, f0);
        out.sdp.constraints.emplace_back(g, rhs);
        span.push_back(std::move(v));
    }
    return out;
}

} // namespace cbp

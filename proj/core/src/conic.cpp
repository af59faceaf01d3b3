#include "cbp/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>

namespace cbp {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;
}

void svec_pack(const SymMat& s, double* out) {
    const int n = s.order();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i)
            out[svec_index(i, j)] = (i == j) ? s(i, i) : kSqrt2 * s(i, j);
}

SymMat svec_unpack(const double* v, int order) {
    SymMat s(order);
    for (int j = 0; j < order; ++j)
        for (int i = 0; i <= j; ++i)
            s.set(i, j, (i == j) ? v[svec_index(i, j)] : kInvSqrt2 * v[svec_index(i, j)]);
    return s;
}

int ConicProblem::cone_offset(int index) const {
    int off = num_free;
    for (int k = 0; k < index; ++k) off += cones[k].dim();
    return off;
}

void ConicProblem::validate() const {
    if (num_free < 0) throw InvalidInput("ConicProblem: negative free count");
    for (const auto& k : cones) {
        switch (k.kind) {
            case ConeSpec::Kind::NonNeg:
                if (k.size < 1) throw InvalidInput("NonNeg cone needs count >= 1");
                break;
            case ConeSpec::Kind::RotatedSOC:
                if (k.size < 3) throw InvalidInput("RotatedSOC cone needs dim >= 3");
                break;
            case ConeSpec::Kind::PsdBlock:
                if (k.size < 1) throw InvalidInput("PsdBlock cone needs order >= 1");
                break;
        }
    }
    const int n = num_vars();
    if (static_cast<int>(c.size()) != n)
        throw InvalidInput("ConicProblem: objective length mismatch");
    if (b.size() != rows.size())
        throw InvalidInput("ConicProblem: rhs length mismatch");
    for (const auto& r : rows) {
        if (r.idx.size() != r.val.size())
            throw InvalidInput("ConicProblem: ragged sparse row");
        for (int j : r.idx)
            if (j < 0 || j >= n) throw InvalidInput("ConicProblem: column out of range");
    }
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SolveStatus::DualInfeasible: return "DualInfeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::NumericalTrouble: return "NumericalTrouble";
    }
    return "?";
}

namespace {

struct Block {
    ConeSpec::Kind kind;
    int offset;  // within the cone part (free variables stripped)
    int dim;
    int order;  // PSD order, 0 otherwise
};

// NT scaling for a PSD block: lambda = R^-1 X R^-T = R^T S R is diagonal.
struct PsdScaling {
    Matrix r, rinv;
    Matrix w, winv;  // w = R R^T
    std::vector<double> lambda;
};

// NT scaling for a second-order cone block in the ECOS form
//   W = eta [ w0, w1^T; w1, I + w1 w1^T / (1 + w0) ]
// with the scaling point normalized to w0^2 - |w1|^2 = 1, so
//   W^-1 = eta^-1 [ w0, -w1^T; -w1, I + w1 w1^T / (1 + w0) ]
// and lambda = W x = W^-1 s.
struct SocScaling {
    double eta = 1.0;
    std::vector<double> wbar;

    void apply(const double* in, double* out, bool inverse) const {
        const int d = static_cast<int>(wbar.size());
        const double sgn = inverse ? -1.0 : 1.0;
        const double f = inverse ? 1.0 / eta : eta;
        double dot1 = 0.0;
        for (int i = 1; i < d; ++i) dot1 += wbar[i] * in[i];
        const double c = in[0] + sgn * dot1 / (1.0 + wbar[0]);
        out[0] = f * (wbar[0] * in[0] + sgn * dot1);
        for (int i = 1; i < d; ++i) out[i] = f * (in[i] + sgn * c * wbar[i]);
    }
};

struct ColEntry {
    int row;
    double val;
};

// Coefficient of a row inside a PSD block in matrix space
// (off-diagonal svec coefficients already divided by sqrt(2)).
struct PsdRowEntry {
    int i, j;
    double v;
};

// Primal-dual path following on the Goldman-Tucker self-dual
// embedding, Nesterov-Todd scaling, Mehrotra predictor-corrector.
// The Newton system is reduced by eliminating the cone variables
// through H^-1, leaving a quasi-definite system in the free variables
// and the equality multipliers that a signed LDL^T factors without
// pivoting.
class Ipm {
public:
    Ipm(const ConicProblem& prob, const SolverOptions& opts) : opts_(opts) {
        build(prob);
    }

    ConicSolution run();

private:
    void build(const ConicProblem& prob);
    bool compute_scalings();
    void form_and_factor();
    void k2_solve(const double* ux, const double* vy, double* dx, double* dy);
    void k2_solve_raw(const double* ux, const double* vy, double* dx, double* dy);
    void apply_h(const double* z, double* out) const;
    void apply_hinv(const double* z, double* out) const;
    void apply_w(const double* z, double* out) const;       // W z
    void apply_wt(const double* z, double* out) const;      // W^T z
    void apply_winv_t(const double* z, double* out) const;  // W^-T z
    void jordan_prod(const double* u, const double* v, double* out) const;
    void lambda_solve(const double* rhs, double* out) const;  // lambda o z = rhs
    double max_step(const double* dz) const;  // sup alpha: lambda + alpha dz in K
    bool cone_interior(const double* z) const;
    void mat_vec(const double* x, double* out) const;   // A x
    void mat_tvec(const double* y, double* out) const;  // A^T y
    double cone_dot(const double* a, const double* b) const;

    SolverOptions opts_;
    int nf_ = 0;    // free variables
    int nz_ = 0;    // cone variables
    int m_ = 0;     // rows
    int naug_ = 0;  // nf + m
    double degree_ = 0.0;
    std::vector<Block> blocks_;
    std::vector<int> rsoc_blocks_;  // rotated back to original coordinates on output

    std::vector<double> c_, b_;
    std::vector<SparseRow> rows_;
    std::vector<std::vector<ColEntry>> cone_cols_;  // per cone variable
    std::vector<std::vector<int>> psd_touch_;       // per block: rows touching it
    std::vector<std::vector<std::vector<PsdRowEntry>>> psd_row_entries_;

    std::vector<double> x_, y_, s_;
    double tau_ = 1.0, kappa_ = 1.0;

    std::vector<double> nn_w2_;  // per cone var: x/s on NonNeg entries
    std::vector<SocScaling> soc_;
    std::vector<PsdScaling> psd_;
    std::vector<double> lambda_;

    std::vector<double> aug_, augd_;
    std::vector<signed char> sign_;
    mutable std::vector<double> wk1_, wk3_, wk4_;
};

void Ipm::build(const ConicProblem& prob) {
    prob.validate();
    nf_ = prob.num_free;
    m_ = prob.num_rows();
    c_ = prob.c;
    b_ = prob.b;
    rows_ = prob.rows;

    int off = 0;
    for (size_t k = 0; k < prob.cones.size(); ++k) {
        const auto& spec = prob.cones[k];
        Block blk;
        blk.kind = spec.kind;
        blk.offset = off;
        blk.dim = spec.dim();
        blk.order = spec.kind == ConeSpec::Kind::PsdBlock ? spec.size : 0;
        switch (spec.kind) {
            case ConeSpec::Kind::NonNeg: degree_ += spec.size; break;
            case ConeSpec::Kind::RotatedSOC:
                degree_ += 2;
                rsoc_blocks_.push_back(static_cast<int>(blocks_.size()));
                break;
            case ConeSpec::Kind::PsdBlock: degree_ += spec.size; break;
        }
        blocks_.push_back(blk);
        off += blk.dim;
    }
    nz_ = off;
    naug_ = nf_ + m_;

    // Rotate every RotatedSOC block onto the standard second-order
    // cone: with the symmetric orthogonal involution
    //   T = [[1, 1, 0], [1, -1, 0], [0, 0, sqrt(2) I]] / sqrt(2)
    // we have u in Q_r iff T u in Q.  Objective and constraint columns
    // transform by T; x and s are mapped back on output.
    if (!rsoc_blocks_.empty()) {
        std::vector<int> head(nf_ + nz_, -1);  // head column -> block head offset
        for (int bi : rsoc_blocks_) {
            const int o = nf_ + blocks_[bi].offset;
            head[o] = o;
            head[o + 1] = o;
        }
        auto rotate_vec = [&](std::vector<double>& v) {
            for (int bi : rsoc_blocks_) {
                const int o = nf_ + blocks_[bi].offset;
                const double a0 = v[o], a1 = v[o + 1];
                v[o] = kInvSqrt2 * (a0 + a1);
                v[o + 1] = kInvSqrt2 * (a0 - a1);
            }
        };
        rotate_vec(c_);
        for (auto& row : rows_) {
            std::map<int, std::pair<double, double>> heads;  // head offset -> (a0, a1)
            for (size_t t = 0; t < row.idx.size(); ++t) {
                const int col = row.idx[t];
                if (col < nf_ + nz_ && head[col] >= 0) {
                    auto& hp = heads[head[col]];
                    if (col == head[col]) hp.first = row.val[t];
                    else hp.second = row.val[t];
                }
            }
            if (heads.empty()) continue;
            SparseRow out;
            for (size_t t = 0; t < row.idx.size(); ++t)
                if (!(row.idx[t] < nf_ + nz_ && head[row.idx[t]] >= 0))
                    out.add(row.idx[t], row.val[t]);
            for (const auto& [o, ab] : heads) {
                const double n0 = kInvSqrt2 * (ab.first + ab.second);
                const double n1 = kInvSqrt2 * (ab.first - ab.second);
                if (n0 != 0.0) out.add(o, n0);
                if (n1 != 0.0) out.add(o + 1, n1);
            }
            row = std::move(out);
        }
    }

    cone_cols_.assign(nz_, {});
    for (int r = 0; r < m_; ++r) {
        const auto& row = rows_[r];
        for (size_t t = 0; t < row.idx.size(); ++t)
            if (row.idx[t] >= nf_) cone_cols_[row.idx[t] - nf_].push_back({r, row.val[t]});
    }

    psd_touch_.assign(blocks_.size(), {});
    psd_row_entries_.assign(blocks_.size(), {});
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        if (blocks_[bi].kind != ConeSpec::Kind::PsdBlock) continue;
        const Block& blk = blocks_[bi];
        auto& per_row = psd_row_entries_[bi];
        per_row.assign(m_, {});
        // map local svec indices back to (i, j)
        std::vector<std::pair<int, int>> ij(blk.dim);
        for (int j = 0; j < blk.order; ++j)
            for (int i = 0; i <= j; ++i) ij[svec_index(i, j)] = {i, j};
        for (int r = 0; r < m_; ++r) {
            const auto& row = rows_[r];
            for (size_t t = 0; t < row.idx.size(); ++t) {
                const int col = row.idx[t] - nf_;
                if (col < blk.offset || col >= blk.offset + blk.dim) continue;
                const auto [i, j] = ij[col - blk.offset];
                const double v = (i == j) ? row.val[t] : row.val[t] * kInvSqrt2;
                per_row[r].push_back({i, j, v});
            }
            if (!per_row[r].empty()) psd_touch_[bi].push_back(r);
        }
    }

    x_.assign(nf_ + nz_, 0.0);
    s_.assign(nf_ + nz_, 0.0);
    y_.assign(m_, 0.0);
    lambda_.assign(nz_, 0.0);
    nn_w2_.assign(nz_, 0.0);
    for (const auto& blk : blocks_) {
        double* xb = x_.data() + nf_ + blk.offset;
        double* sb = s_.data() + nf_ + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) xb[i] = sb[i] = 1.0;
                break;
            case ConeSpec::Kind::RotatedSOC:
                xb[0] = sb[0] = 1.0;
                break;
            case ConeSpec::Kind::PsdBlock:
                for (int i = 0; i < blk.order; ++i)
                    xb[svec_index(i, i)] = sb[svec_index(i, i)] = 1.0;
                break;
        }
    }
    soc_.resize(blocks_.size());
    psd_.resize(blocks_.size());
    aug_.assign(static_cast<size_t>(naug_) * naug_, 0.0);
    sign_.assign(naug_, 1);
    for (int i = 0; i < nf_; ++i) sign_[i] = -1;
    wk1_.assign(nf_ + nz_, 0.0);
    wk3_.assign(nz_, 0.0);
    wk4_.assign(nz_, 0.0);
}

void Ipm::mat_vec(const double* x, double* out) const {
    for (int r = 0; r < m_; ++r) {
        const auto& row = rows_[r];
        double acc = 0.0;
        for (size_t t = 0; t < row.idx.size(); ++t) acc += row.val[t] * x[row.idx[t]];
        out[r] = acc;
    }
}

void Ipm::mat_tvec(const double* y, double* out) const {
    std::fill(out, out + nf_ + nz_, 0.0);
    for (int r = 0; r < m_; ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        const auto& row = rows_[r];
        for (size_t t = 0; t < row.idx.size(); ++t) out[row.idx[t]] += row.val[t] * yr;
    }
}

double Ipm::cone_dot(const double* a, const double* b) const {
    double acc = 0.0;
    for (int i = 0; i < nz_; ++i) acc += a[i] * b[i];
    return acc;
}

bool Ipm::compute_scalings() {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* xb = x_.data() + nf_ + blk.offset;
        const double* sb = s_.data() + nf_ + blk.offset;
        double* lb = lambda_.data() + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg: {
                for (int i = 0; i < blk.dim; ++i) {
                    if (xb[i] <= 0.0 || sb[i] <= 0.0) return false;
                    nn_w2_[blk.offset + i] = xb[i] / sb[i];
                    lb[i] = std::sqrt(xb[i] * sb[i]);
                }
                break;
            }
            case ConeSpec::Kind::RotatedSOC: {
                const int d = blk.dim;
                double rx = xb[0] * xb[0], rs = sb[0] * sb[0];
                for (int i = 1; i < d; ++i) {
                    rx -= xb[i] * xb[i];
                    rs -= sb[i] * sb[i];
                }
                if (rx <= 0.0 || rs <= 0.0 || xb[0] <= 0.0 || sb[0] <= 0.0) return false;
                const double gx = std::sqrt(rx), gs = std::sqrt(rs);
                SocScaling& sc = soc_[bi];
                sc.wbar.assign(d, 0.0);
                double xs = 0.0;
                for (int i = 0; i < d; ++i) xs += (xb[i] / gx) * (sb[i] / gs);
                const double gamma = std::sqrt(0.5 * (1.0 + xs));
                // scaling point with W^2 x = s: wbar = (sbar + J xbar)/(2 gamma)
                sc.wbar[0] = (sb[0] / gs + xb[0] / gx) / (2.0 * gamma);
                for (int i = 1; i < d; ++i)
                    sc.wbar[i] = (sb[i] / gs - xb[i] / gx) / (2.0 * gamma);
                sc.eta = std::sqrt(gs / gx);
                sc.apply(xb, lb, /*inverse=*/false);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const int mp = blk.order;
                SymMat X = svec_unpack(xb, mp);
                SymMat S = svec_unpack(sb, mp);
                // X = U^T U; then U S U^T = V diag(ev) V^T
                std::vector<double> u = X.data();
                if (!dense::cholesky_upper(u.data(), mp, 0.0)) return false;
                Matrix Umat(mp, mp);
                std::memcpy(Umat.a.data(), u.data(), u.size() * sizeof(double));
                Matrix SUt(mp, mp);  // S U^T
                for (int i = 0; i < mp; ++i)
                    for (int j = 0; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = 0; k <= j; ++k) acc += S(i, k) * Umat(k, j);
                        SUt(i, j) = acc;
                    }
                Matrix Msym(mp, mp);  // U (S U^T)
                for (int i = 0; i < mp; ++i)
                    for (int j = 0; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = i; k < mp; ++k) acc += Umat(i, k) * SUt(k, j);
                        Msym(i, j) = acc;
                    }
                std::vector<double> ev(mp);
                Matrix V;
                auto jr = dense::jacobi_eig(Msym.a.data(), mp, ev.data(), V, 1e-13, 60);
                if (!jr.converged) return false;
                PsdScaling& sc = psd_[bi];
                sc.lambda.assign(mp, 0.0);
                for (int i = 0; i < mp; ++i) {
                    if (ev[i] <= 0.0) return false;
                    sc.lambda[i] = std::sqrt(ev[i]);
                }
                // R = U^T V Sigma^-1/2 with Sigma = diag(lambda)
                sc.r = Matrix(mp, mp);
                for (int i = 0; i < mp; ++i)
                    for (int j = 0; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = 0; k <= i; ++k) acc += Umat(k, i) * V(k, j);
                        sc.r(i, j) = acc / std::sqrt(sc.lambda[j]);
                    }
                // R^-1 = Sigma^1/2 V^T U^-T
                Matrix Uinvt(mp, mp);
                std::vector<double> col(mp);
                for (int j = 0; j < mp; ++j) {
                    std::fill(col.begin(), col.end(), 0.0);
                    col[j] = 1.0;
                    dense::solve_upper_t(Umat.a.data(), mp, col.data());
                    for (int i = 0; i < mp; ++i) Uinvt(i, j) = col[i];
                }
                sc.rinv = Matrix(mp, mp);
                for (int i = 0; i < mp; ++i)
                    for (int j = 0; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = 0; k < mp; ++k) acc += V(k, i) * Uinvt(j, k);
                        sc.rinv(i, j) = acc * std::sqrt(sc.lambda[i]);
                    }
                sc.w = matmul_nt(sc.r, sc.r);
                sc.winv = matmul_tn(sc.rinv, sc.rinv);
                for (int j = 0; j < mp; ++j)
                    for (int i = 0; i <= j; ++i)
                        lb[svec_index(i, j)] = (i == j) ? sc.lambda[i] : 0.0;
                break;
            }
        }
    }
    return true;
}

void Ipm::apply_hinv(const double* z, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* zb = z + blk.offset;
        double* ob = out + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) ob[i] = nn_w2_[blk.offset + i] * zb[i];
                break;
            case ConeSpec::Kind::RotatedSOC: {
                const SocScaling& sc = soc_[bi];
                std::vector<double> tmp(blk.dim);
                sc.apply(zb, tmp.data(), true);
                sc.apply(tmp.data(), ob, true);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                SymMat Z = svec_unpack(zb, blk.order);
                SymMat r = congruence(sc.w, Z);  // w Z w (w symmetric)
                svec_pack(r, ob);
                break;
            }
        }
    }
}

void Ipm::apply_h(const double* z, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* zb = z + blk.offset;
        double* ob = out + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) ob[i] = zb[i] / nn_w2_[blk.offset + i];
                break;
            case ConeSpec::Kind::RotatedSOC: {
                const SocScaling& sc = soc_[bi];
                std::vector<double> tmp(blk.dim);
                sc.apply(zb, tmp.data(), false);
                sc.apply(tmp.data(), ob, false);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                SymMat Z = svec_unpack(zb, blk.order);
                SymMat r = congruence(sc.winv, Z);  // w^-1 Z w^-1
                svec_pack(r, ob);
                break;
            }
        }
    }
}

void Ipm::apply_w(const double* z, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* zb = z + blk.offset;
        double* ob = out + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i)
                    ob[i] = zb[i] / std::sqrt(nn_w2_[blk.offset + i]);
                break;
            case ConeSpec::Kind::RotatedSOC: {
                soc_[bi].apply(zb, ob, false);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                const int mp = blk.order;
                SymMat Z = svec_unpack(zb, mp);
                // R^-1 Z R^-T, symmetrized against roundoff
                Matrix t(mp, mp);
                for (int i = 0; i < mp; ++i)
                    for (int j = 0; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = 0; k < mp; ++k) acc += sc.rinv(i, k) * Z(k, j);
                        t(i, j) = acc;
                    }
                Matrix res = matmul_nt(t, sc.rinv);
                SymMat rz(mp);
                for (int i = 0; i < mp; ++i)
                    for (int j = i; j < mp; ++j) rz.set(i, j, 0.5 * (res(i, j) + res(j, i)));
                svec_pack(rz, ob);
                break;
            }
        }
    }
}

void Ipm::apply_wt(const double* z, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        if (blk.kind == ConeSpec::Kind::PsdBlock) {
            const PsdScaling& sc = psd_[bi];
            SymMat Z = svec_unpack(z + blk.offset, blk.order);
            SymMat r = congruence(sc.rinv, Z);  // R^-T Z R^-1
            svec_pack(r, out + blk.offset);
        }
    }
    // W is symmetric on NonNeg and SOC blocks
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        if (blk.kind == ConeSpec::Kind::PsdBlock) continue;
        const double* zb = z + blk.offset;
        double* ob = out + blk.offset;
        if (blk.kind == ConeSpec::Kind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i)
                ob[i] = zb[i] / std::sqrt(nn_w2_[blk.offset + i]);
        } else {
            soc_[bi].apply(zb, ob, false);
        }
    }
}

void Ipm::apply_winv_t(const double* z, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* zb = z + blk.offset;
        double* ob = out + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i)
                    ob[i] = zb[i] * std::sqrt(nn_w2_[blk.offset + i]);
                break;
            case ConeSpec::Kind::RotatedSOC: {
                soc_[bi].apply(zb, ob, true);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                SymMat Z = svec_unpack(zb, blk.order);
                SymMat r = congruence(sc.r, Z);  // R^T Z R
                svec_pack(r, ob);
                break;
            }
        }
    }
}

void Ipm::jordan_prod(const double* u, const double* v, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* ub = u + blk.offset;
        const double* vb = v + blk.offset;
        double* ob = out + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) ob[i] = ub[i] * vb[i];
                break;
            case ConeSpec::Kind::RotatedSOC: {
                const int d = blk.dim;
                double dot = 0.0;
                for (int i = 0; i < d; ++i) dot += ub[i] * vb[i];
                const double u0 = ub[0], v0 = vb[0];
                ob[0] = dot;
                for (int i = 1; i < d; ++i) ob[i] = u0 * vb[i] + v0 * ub[i];
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const int mp = blk.order;
                SymMat U = svec_unpack(ub, mp);
                SymMat V = svec_unpack(vb, mp);
                SymMat P(mp);
                for (int i = 0; i < mp; ++i)
                    for (int j = i; j < mp; ++j) {
                        double acc = 0.0;
                        for (int k = 0; k < mp; ++k)
                            acc += U(i, k) * V(k, j) + V(i, k) * U(k, j);
                        P.set(i, j, 0.5 * acc);
                    }
                svec_pack(P, ob);
                break;
            }
        }
    }
}

void Ipm::lambda_solve(const double* rhs, double* out) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* rb = rhs + blk.offset;
        double* ob = out + blk.offset;
        const double* lb = lambda_.data() + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) ob[i] = rb[i] / lb[i];
                break;
            case ConeSpec::Kind::RotatedSOC: {
                const int d = blk.dim;
                double det = lb[0] * lb[0];
                for (int i = 1; i < d; ++i) det -= lb[i] * lb[i];
                double l1r1 = 0.0;
                for (int i = 1; i < d; ++i) l1r1 += lb[i] * rb[i];
                const double z0 = (lb[0] * rb[0] - l1r1) / det;
                ob[0] = z0;
                for (int i = 1; i < d; ++i) ob[i] = (rb[i] - z0 * lb[i]) / lb[0];
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                for (int j = 0; j < blk.order; ++j)
                    for (int i = 0; i <= j; ++i)
                        ob[svec_index(i, j)] =
                            rb[svec_index(i, j)] * 2.0 / (sc.lambda[i] + sc.lambda[j]);
                break;
            }
        }
    }
}

double Ipm::max_step(const double* dz) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* db = dz + blk.offset;
        const double* lb = lambda_.data() + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i)
                    if (db[i] < 0.0) alpha = std::min(alpha, -lb[i] / db[i]);
                break;
            case ConeSpec::Kind::RotatedSOC: {
                const int d = blk.dim;
                double a = db[0] * db[0], bq = lb[0] * db[0], cq = lb[0] * lb[0];
                for (int i = 1; i < d; ++i) {
                    a -= db[i] * db[i];
                    bq -= lb[i] * db[i];
                    cq -= lb[i] * lb[i];
                }
                bq *= 2.0;
                // first nonnegative root of a t^2 + b t + c, c > 0
                double bound = std::numeric_limits<double>::infinity();
                if (std::fabs(a) < 1e-300) {
                    if (bq < 0.0) bound = -cq / bq;
                } else {
                    const double disc = bq * bq - 4.0 * a * cq;
                    if (disc >= 0.0) {
                        const double sq = std::sqrt(disc);
                        const double lo = (-bq - (a > 0.0 ? sq : -sq)) / (2.0 * a);
                        const double hi = (-bq + (a > 0.0 ? sq : -sq)) / (2.0 * a);
                        if (a > 0.0) {
                            if (lo > 0.0) bound = lo;
                        } else {
                            bound = std::max(hi, 0.0);
                        }
                    }
                }
                if (db[0] < 0.0) bound = std::min(bound, -lb[0] / db[0]);
                alpha = std::min(alpha, bound);
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                const int mp = blk.order;
                std::vector<double> mat(static_cast<size_t>(mp) * mp);
                for (int j = 0; j < mp; ++j)
                    for (int i = 0; i <= j; ++i) {
                        const double v = (i == j) ? db[svec_index(i, j)]
                                                  : db[svec_index(i, j)] * kInvSqrt2;
                        const double sca = v / std::sqrt(sc.lambda[i] * sc.lambda[j]);
                        mat[static_cast<size_t>(i) * mp + j] = sca;
                        mat[static_cast<size_t>(j) * mp + i] = sca;
                    }
                std::vector<double> ev(mp);
                Matrix V;
                dense::jacobi_eig(mat.data(), mp, ev.data(), V, 1e-9, 30);
                double emin = ev[0];
                for (int i = 1; i < mp; ++i) emin = std::min(emin, ev[i]);
                if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
                break;
            }
        }
    }
    return alpha;
}

bool Ipm::cone_interior(const double* z) const {
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        const double* zb = z + blk.offset;
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i)
                    if (zb[i] <= 0.0) return false;
                break;
            case ConeSpec::Kind::RotatedSOC: {
                if (zb[0] <= 0.0) return false;
                double r = zb[0] * zb[0];
                for (int i = 1; i < blk.dim; ++i) r -= zb[i] * zb[i];
                if (r <= 0.0) return false;
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                SymMat Z = svec_unpack(zb, blk.order);
                std::vector<double> u = Z.data();
                if (!dense::cholesky_upper(u.data(), blk.order, 0.0)) return false;
                break;
            }
        }
    }
    return true;
}

void Ipm::form_and_factor() {
    const double delta = opts_.static_reg;
    std::fill(aug_.begin(), aug_.end(), 0.0);
    auto at = [&](int i, int j) -> double& {
        return aug_[static_cast<size_t>(i) * naug_ + j];
    };
    for (int i = 0; i < nf_; ++i) at(i, i) = -delta;
    for (int r = 0; r < m_; ++r) {
        const auto& row = rows_[r];
        for (size_t t = 0; t < row.idx.size(); ++t)
            if (row.idx[t] < nf_) at(nf_ + r, row.idx[t]) = row.val[t];
        at(nf_ + r, nf_ + r) = delta;
    }
    // G = A_z H^-1 A_z^T into the lower triangle
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& blk = blocks_[bi];
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg: {
                for (int i = 0; i < blk.dim; ++i) {
                    const auto& col = cone_cols_[blk.offset + i];
                    const double h = nn_w2_[blk.offset + i];
                    for (size_t a = 0; a < col.size(); ++a)
                        for (size_t b2 = 0; b2 <= a; ++b2)
                            at(nf_ + col[a].row, nf_ + col[b2].row) +=
                                h * col[a].val * col[b2].val;
                }
                break;
            }
            case ConeSpec::Kind::RotatedSOC: {
                const SocScaling& sc = soc_[bi];
                const int d = blk.dim;
                std::vector<double> hinv(static_cast<size_t>(d) * d);
                std::vector<double> e(d), t1(d), t2(d);
                for (int j = 0; j < d; ++j) {
                    std::fill(e.begin(), e.end(), 0.0);
                    e[j] = 1.0;
                    sc.apply(e.data(), t1.data(), true);
                    sc.apply(t1.data(), t2.data(), true);
                    for (int i = 0; i < d; ++i) hinv[static_cast<size_t>(i) * d + j] = t2[i];
                }
                for (int ta = 0; ta < d; ++ta) {
                    const auto& ca = cone_cols_[blk.offset + ta];
                    if (ca.empty()) continue;
                    for (int tb = 0; tb < d; ++tb) {
                        const double hv = hinv[static_cast<size_t>(ta) * d + tb];
                        if (hv == 0.0) continue;
                        const auto& cb = cone_cols_[blk.offset + tb];
                        for (const auto& ea : ca)
                            for (const auto& eb : cb) {
                                if (ea.row < eb.row) continue;
                                at(nf_ + ea.row, nf_ + eb.row) += ea.val * hv * eb.val;
                            }
                    }
                }
                break;
            }
            case ConeSpec::Kind::PsdBlock: {
                const PsdScaling& sc = psd_[bi];
                const int mp = blk.order;
                const auto& touch = psd_touch_[bi];
                const auto& entries = psd_row_entries_[bi];
                Matrix T(mp, mp), B(mp, mp);
                std::vector<int> brows;
                for (size_t ti = 0; ti < touch.size(); ++ti) {
                    const int r = touch[ti];
                    // T = w E_r w via the sparse entries of E_r
                    std::fill(B.a.begin(), B.a.end(), 0.0);
                    brows.clear();
                    for (const auto& e : entries[r]) {
                        double* bi_row = B.row_ptr(e.i);
                        const double* wj = sc.w.row_ptr(e.j);
                        for (int k = 0; k < mp; ++k) bi_row[k] += e.v * wj[k];
                        brows.push_back(e.i);
                        if (e.i != e.j) {
                            double* bj_row = B.row_ptr(e.j);
                            const double* wi = sc.w.row_ptr(e.i);
                            for (int k = 0; k < mp; ++k) bj_row[k] += e.v * wi[k];
                            brows.push_back(e.j);
                        }
                    }
                    std::sort(brows.begin(), brows.end());
                    brows.erase(std::unique(brows.begin(), brows.end()), brows.end());
                    std::fill(T.a.begin(), T.a.end(), 0.0);
                    for (int a : brows) {
                        const double* brow = B.row_ptr(a);
                        const double* wcol = sc.w.row_ptr(a);  // w symmetric
                        for (int i = 0; i < mp; ++i) {
                            const double wia = wcol[i];
                            if (wia == 0.0) continue;
                            double* trow = T.row_ptr(i);
                            for (int k = 0; k < mp; ++k) trow[k] += wia * brow[k];
                        }
                    }
                    for (size_t tj = 0; tj <= ti; ++tj) {
                        const int r2 = touch[tj];
                        double acc = 0.0;
                        for (const auto& e : entries[r2])
                            acc += (e.i == e.j) ? e.v * T(e.i, e.i)
                                                : e.v * (T(e.i, e.j) + T(e.j, e.i));
                        at(nf_ + r, nf_ + r2) += acc;
                    }
                }
                break;
            }
        }
    }
    dense::ldl_factor(aug_.data(), naug_, sign_.data(), opts_.static_reg, augd_);
}

void Ipm::k2_solve_raw(const double* ux, const double* vy, double* dx, double* dy) {
    std::vector<double> rhs(naug_);
    for (int i = 0; i < nf_; ++i) rhs[i] = ux[i];
    apply_hinv(ux + nf_, wk3_.data());
    for (int r = 0; r < m_; ++r) rhs[nf_ + r] = vy[r];
    for (int zc = 0; zc < nz_; ++zc) {
        const double t = wk3_[zc];
        if (t == 0.0) continue;
        for (const auto& e : cone_cols_[zc]) rhs[nf_ + e.row] += e.val * t;
    }
    dense::ldl_solve(aug_.data(), naug_, augd_.data(), rhs.data());
    for (int i = 0; i < nf_; ++i) dx[i] = rhs[i];
    for (int r = 0; r < m_; ++r) dy[r] = rhs[nf_ + r];
    // dx_z = H^-1 (A_z^T dy - u_z)
    std::fill(wk4_.begin(), wk4_.end(), 0.0);
    for (int r = 0; r < m_; ++r) {
        const double yr = dy[r];
        if (yr == 0.0) continue;
        const auto& row = rows_[r];
        for (size_t t = 0; t < row.idx.size(); ++t)
            if (row.idx[t] >= nf_) wk4_[row.idx[t] - nf_] += row.val[t] * yr;
    }
    for (int zc = 0; zc < nz_; ++zc) wk4_[zc] -= ux[nf_ + zc];
    apply_hinv(wk4_.data(), dx + nf_);
}

void Ipm::k2_solve(const double* ux, const double* vy, double* dx, double* dy) {
    const int n = nf_ + nz_;
    k2_solve_raw(ux, vy, dx, dy);
    std::vector<double> rx(n), ry(m_), cx(n), cy(m_);
    for (int it = 0; it < opts_.refine_steps; ++it) {
        apply_h(dx + nf_, wk3_.data());
        mat_tvec(dy, wk1_.data());
        for (int i = 0; i < nf_; ++i) rx[i] = ux[i] - wk1_[i];
        for (int zc = 0; zc < nz_; ++zc)
            rx[nf_ + zc] = ux[nf_ + zc] - (wk1_[nf_ + zc] - wk3_[zc]);
        mat_vec(dx, ry.data());
        for (int r = 0; r < m_; ++r) ry[r] = vy[r] - ry[r];
        k2_solve_raw(rx.data(), ry.data(), cx.data(), cy.data());
        for (int i = 0; i < n; ++i) dx[i] += cx[i];
        for (int r = 0; r < m_; ++r) dy[r] += cy[r];
    }
}

ConicSolution Ipm::run() {
    ConicSolution sol;
    const int n = nf_ + nz_;
    sol.x.assign(n, 0.0);
    sol.y.assign(m_, 0.0);
    sol.s.assign(n, 0.0);

    const double bnorm = max_abs(b_);
    const double cnorm = max_abs(c_);

    std::vector<double> res_x(n), res_y(m_), tmp_n(n), tmp_m(m_);
    std::vector<double> g(nz_), u_rhs(n);
    std::vector<double> p0(n), q0(m_), p1(n), q1(m_);
    std::vector<double> dx(n), dy(m_), ds(nz_), dxs(nz_), dss(nz_);
    std::vector<double> dxs_aff(nz_), dss_aff(nz_), cone_e(nz_, 0.0);

    for (const auto& blk : blocks_) {
        switch (blk.kind) {
            case ConeSpec::Kind::NonNeg:
                for (int i = 0; i < blk.dim; ++i) cone_e[blk.offset + i] = 1.0;
                break;
            case ConeSpec::Kind::RotatedSOC:
                cone_e[blk.offset] = 1.0;
                break;
            case ConeSpec::Kind::PsdBlock:
                for (int i = 0; i < blk.order; ++i)
                    cone_e[blk.offset + svec_index(i, i)] = 1.0;
                break;
        }
    }

    int stall = 0;
    double dtau_aff = 0.0, dkappa_aff = 0.0;

    auto unrotate = [&](std::vector<double>& v) {
        for (int bi : rsoc_blocks_) {
            const int o = nf_ + blocks_[bi].offset;
            const double a0 = v[o], a1 = v[o + 1];
            v[o] = kInvSqrt2 * (a0 + a1);
            v[o + 1] = kInvSqrt2 * (a0 - a1);
        }
    };

    for (int iter = 0; iter <= opts_.max_iter; ++iter) {
        mat_tvec(y_.data(), res_x.data());
        for (int i = 0; i < n; ++i) res_x[i] += s_[i] - c_[i] * tau_;
        mat_vec(x_.data(), res_y.data());
        for (int r = 0; r < m_; ++r) res_y[r] -= b_[r] * tau_;
        double ctx = 0.0, bty = 0.0;
        for (int i = 0; i < n; ++i) ctx += c_[i] * x_[i];
        for (int r = 0; r < m_; ++r) bty += b_[r] * y_[r];
        const double res_tau = ctx - bty + kappa_;
        const double mu =
            (cone_dot(x_.data() + nf_, s_.data() + nf_) + tau_ * kappa_) / (degree_ + 1.0);

        const double pres = max_abs(res_y) / (tau_ * (1.0 + bnorm));
        const double dres = max_abs(res_x) / (tau_ * (1.0 + cnorm));
        const double gapres = std::fabs(ctx - bty) / (tau_ + std::fabs(ctx));

        if (opts_.verbose)
            std::fprintf(stderr,
                         "it %3d  mu %9.2e  pres %9.2e  dres %9.2e  gap %9.2e  tau %9.2e\n",
                         iter, mu, pres, dres, gapres, tau_);

        if (pres <= opts_.tol_feas && dres <= opts_.tol_feas && gapres <= opts_.tol_gap) {
            sol.status = SolveStatus::Optimal;
            for (int i = 0; i < n; ++i) sol.x[i] = x_[i] / tau_;
            for (int r = 0; r < m_; ++r) sol.y[r] = y_[r] / tau_;
            for (int i = 0; i < n; ++i) sol.s[i] = s_[i] / tau_;
            sol.primal_obj = ctx / tau_;
            sol.dual_obj = bty / tau_;
            sol.gap = std::fabs(ctx - bty) / tau_;
            sol.iterations = iter;
            unrotate(sol.x);
            unrotate(sol.s);
            return sol;
        }
        if (bty > 1e-10 * (1.0 + bnorm)) {
            mat_tvec(y_.data(), tmp_n.data());
            for (int i = 0; i < n; ++i) tmp_n[i] += s_[i];
            if (max_abs(tmp_n) / bty <= opts_.tol_cert) {
                sol.status = SolveStatus::PrimalInfeasible;
                for (int r = 0; r < m_; ++r) sol.y[r] = y_[r] / bty;
                for (int i = 0; i < n; ++i) sol.s[i] = s_[i] / bty;
                sol.iterations = iter;
                unrotate(sol.s);
                return sol;
            }
        }
        if (ctx < -1e-10 * (1.0 + cnorm)) {
            mat_vec(x_.data(), tmp_m.data());
            if (max_abs(tmp_m) / (-ctx) <= opts_.tol_cert) {
                sol.status = SolveStatus::DualInfeasible;
                for (int i = 0; i < n; ++i) sol.x[i] = x_[i] / (-ctx);
                sol.iterations = iter;
                unrotate(sol.x);
                return sol;
            }
        }
        if (iter == opts_.max_iter) break;

        if (!compute_scalings()) {
            sol.status = SolveStatus::NumericalTrouble;
            sol.iterations = iter;
            return sol;
        }
        form_and_factor();
        k2_solve(c_.data(), b_.data(), p1.data(), q1.data());
        double ctp1 = 0.0, btq1 = 0.0;
        for (int i = 0; i < n; ++i) ctp1 += c_[i] * p1[i];
        for (int r = 0; r < m_; ++r) btq1 += b_[r] * q1[r];
        const double denom = ctp1 - btq1 - kappa_ / tau_;

        double dtau = 0.0, dkappa = 0.0;
        auto direction = [&](double sigma, bool with_corr) {
            jordan_prod(lambda_.data(), lambda_.data(), wk3_.data());
            for (int zc = 0; zc < nz_; ++zc) wk3_[zc] = -wk3_[zc] + sigma * mu * cone_e[zc];
            if (with_corr) {
                jordan_prod(dxs_aff.data(), dss_aff.data(), wk4_.data());
                for (int zc = 0; zc < nz_; ++zc) wk3_[zc] -= wk4_[zc];
            }
            lambda_solve(wk3_.data(), g.data());
            double ht = -tau_ * kappa_ + sigma * mu;
            if (with_corr) ht -= dtau_aff * dkappa_aff;

            const double rf = 1.0 - sigma;
            apply_wt(g.data(), wk3_.data());
            for (int i = 0; i < nf_; ++i) u_rhs[i] = -rf * res_x[i];
            for (int zc = 0; zc < nz_; ++zc)
                u_rhs[nf_ + zc] = -rf * res_x[nf_ + zc] - wk3_[zc];
            for (int r = 0; r < m_; ++r) tmp_m[r] = -rf * res_y[r];
            k2_solve(u_rhs.data(), tmp_m.data(), p0.data(), q0.data());

            double ctp0 = 0.0, btq0 = 0.0;
            for (int i = 0; i < n; ++i) ctp0 += c_[i] * p0[i];
            for (int r = 0; r < m_; ++r) btq0 += b_[r] * q0[r];
            dtau = (-rf * res_tau - ht / tau_ - ctp0 + btq0) / denom;
            for (int i = 0; i < n; ++i) dx[i] = p0[i] + dtau * p1[i];
            for (int r = 0; r < m_; ++r) dy[r] = q0[r] + dtau * q1[r];
            apply_w(dx.data() + nf_, dxs.data());
            for (int zc = 0; zc < nz_; ++zc) wk3_[zc] = g[zc] - dxs[zc];
            apply_wt(wk3_.data(), ds.data());
            apply_winv_t(ds.data(), dss.data());
            dkappa = (ht - kappa_ * dtau) / tau_;
        };

        direction(0.0, false);
        double alpha = std::min(max_step(dxs.data()), max_step(dss.data()));
        if (dtau < 0.0) alpha = std::min(alpha, -tau_ / dtau);
        if (dkappa < 0.0) alpha = std::min(alpha, -kappa_ / dkappa);
        const double alpha_aff = std::min(1.0, alpha);
        const double sigma = std::pow(1.0 - alpha_aff, 3);

        dxs_aff = dxs;
        dss_aff = dss;
        dtau_aff = dtau;
        dkappa_aff = dkappa;

        direction(sigma, true);
        alpha = std::min(max_step(dxs.data()), max_step(dss.data()));
        if (dtau < 0.0) alpha = std::min(alpha, -tau_ / dtau);
        if (dkappa < 0.0) alpha = std::min(alpha, -kappa_ / dkappa);
        alpha = std::min(1.0, 0.99 * alpha);

        for (int tries = 0; tries < 12 && alpha > 0.0; ++tries) {
            bool ok = tau_ + alpha * dtau > 0.0 && kappa_ + alpha * dkappa > 0.0;
            if (ok) {
                for (int i = 0; i < n; ++i) tmp_n[i] = x_[i] + alpha * dx[i];
                ok = cone_interior(tmp_n.data() + nf_);
            }
            if (ok) {
                for (int zc = 0; zc < nz_; ++zc) wk3_[zc] = s_[nf_ + zc] + alpha * ds[zc];
                ok = cone_interior(wk3_.data());
            }
            if (ok) break;
            alpha *= 0.8;
        }

        if (alpha < 1e-9) {
            if (++stall >= 2) {
                sol.status = SolveStatus::NumericalTrouble;
                sol.iterations = iter;
                return sol;
            }
        } else {
            stall = 0;
        }

        for (int i = 0; i < n; ++i) x_[i] += alpha * dx[i];
        for (int r = 0; r < m_; ++r) y_[r] += alpha * dy[r];
        for (int zc = 0; zc < nz_; ++zc) s_[nf_ + zc] += alpha * ds[zc];
        tau_ += alpha * dtau;
        kappa_ += alpha * dkappa;
    }

    sol.status = SolveStatus::NumericalTrouble;
    sol.iterations = opts_.max_iter;
    return sol;
}

} // namespace

ConicSolution solve(const ConicProblem& p, const SolverOptions& opts) {
    Ipm ipm(p, opts);
    return ipm.run();
}

SymMat extract_psd_block(const ConicSolution& sol, const ConicProblem& p, int index) {
    if (index < 0 || index >= static_cast<int>(p.cones.size()) ||
        p.cones[index].kind != ConeSpec::Kind::PsdBlock)
        throw InvalidIndex("extract_psd_block: index does not address a PsdBlock");
    const int off = p.cone_offset(index);
    return svec_unpack(sol.x.data() + off, p.cones[index].size);
}

} // namespace cbp

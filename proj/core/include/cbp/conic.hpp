#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbp/symmat.hpp"

namespace cbp {

/// One factor of the cone product a ConicProblem's variables live in.
///
///   NonNeg(count)     count scalar variables >= 0
///   RotatedSOC(dim)   (u1, u2, w) with 2 u1 u2 >= |w|^2, u1, u2 >= 0, dim >= 3
///   PsdBlock(order)   a symmetric order x order matrix, svec-packed
///                     (diagonal as-is, off-diagonal times sqrt(2)),
///                     required positive semidefinite
struct ConeSpec {
    enum class Kind : std::uint8_t { NonNeg, RotatedSOC, PsdBlock };
    Kind kind = Kind::NonNeg;
    int size = 0;  // count, dim, or order

    int dim() const {
        switch (kind) {
            case Kind::NonNeg: return size;
            case Kind::RotatedSOC: return size;
            case Kind::PsdBlock: return size * (size + 1) / 2;
        }
        return 0;
    }
    static ConeSpec nonneg(int count) { return {Kind::NonNeg, count}; }
    static ConeSpec rotated_soc(int dim) { return {Kind::RotatedSOC, dim}; }
    static ConeSpec psd(int order) { return {Kind::PsdBlock, order}; }
};

inline int svec_dim(int order) { return order * (order + 1) / 2; }
/// Index of entry (i, j), i <= j, in the svec packing of a symmetric
/// matrix (column by column of the upper triangle).
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

void svec_pack(const SymMat& s, double* out);
SymMat svec_unpack(const double* v, int order);

struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
    void add(int col, double v) {
        idx.push_back(col);
        val.push_back(v);
    }
};

/// Standard-form conic program
///   minimize    c^T x
///   subject to  A x = b,   x in R^num_free x K1 x K2 x ...
/// Variables are ordered: free block first, then the cones in order.
struct ConicProblem {
    int num_free = 0;
    std::vector<ConeSpec> cones;
    std::vector<double> c;
    std::vector<SparseRow> rows;
    std::vector<double> b;

    int num_vars() const {
        int n = num_free;
        for (const auto& k : cones) n += k.dim();
        return n;
    }
    int num_rows() const { return static_cast<int>(rows.size()); }
    /// Offset of cone block `index` within the variable vector.
    int cone_offset(int index) const;
    void validate() const;  // throws InvalidInput on malformed data
};

struct SolverOptions {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    /// Residual bound for returned infeasibility certificates.
    double tol_cert = 1e-8;
    int max_iter = 200;
    double static_reg = 1e-10;
    int refine_steps = 2;
    bool verbose = false;
};

enum class SolveStatus : std::uint8_t {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Unbounded,
    NumericalTrouble,
};

const char* to_string(SolveStatus s);

/// Primal/dual solution.  For infeasibility statuses x or (y, s) hold
/// the normalized improving ray instead of a feasible point:
///   PrimalInfeasible:  b^T y = 1,  |A^T y + s|_inf <= tol_cert, s in K*
///   DualInfeasible:    c^T x = -1, |A x|_inf <= tol_cert,       x in K
struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalTrouble;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> s;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Primal-dual interior-point solve over the self-dual embedding with
/// Nesterov-Todd scaling and a Mehrotra predictor-corrector.  Never
/// throws for numerical reasons; trouble is reported in the status.
ConicSolution solve(const ConicProblem& p, const SolverOptions& opts = {});

/// De-vectorize PSD cone block `index` (0-based among the cones list;
/// must address a PsdBlock) from a solution's primal x.
SymMat extract_psd_block(const ConicSolution& sol, const ConicProblem& p, int index);

} // namespace cbp

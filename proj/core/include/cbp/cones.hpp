#pragma once

#include <optional>

#include "cbp/expr.hpp"

namespace cbp {

/// Which inner/outer approximation family a construction targets:
/// diagonally dominant (LP) or scaled diagonally dominant (SOCP).
enum class Family : unsigned char { DD, SDD };

const char* to_string(Family f);

/// Extreme ray of the dd cone: a vector with at most two nonzero
/// components, each +1 or -1.  j < 0 marks a singleton ray.
struct ExtremeRay {
    int dimension = 0;
    int i = 0;
    int j = -1;
    int si = 1;
    int sj = 1;

    std::vector<double> to_vector() const {
        std::vector<double> v(dimension, 0.0);
        v[i] = si;
        if (j >= 0) v[j] = sj;
        return v;
    }
};

/// The n^2 extreme rays of DD_n in deterministic order: singletons by
/// index, then pairs (i < j) with (+,+) before (+,-).
std::vector<ExtremeRay> dd_extreme_rays(int n);

/// Selector V = [e_i, e_j] (i < j) of a 2x2 principal pattern; there
/// are C(n,2) of them.
struct BlockSelector {
    int dimension = 0;
    int i = 0;
    int j = 1;
};

std::vector<BlockSelector> sdd_block_selectors(int n);

/// The change-of-basis matrix driving one pursuit iteration.
struct BasisMatrix {
    Matrix u;
    enum class Source : unsigned char { Identity, CholeskyOfPrimal, CholeskyOfDualSlack };
    Source source = Source::Identity;
    int iteration = 0;
    /// Diagonal shift used by the regularized Cholesky that produced u.
    double shift = 0.0;

    int order() const { return u.rows; }
    static BasisMatrix identity(int n);
};

const char* to_string(BasisMatrix::Source s);

/// Variables and constraints expressing M = U^T Q U with Q in the
/// family cone.  The dd side parametrizes Q directly by nonnegative
/// variables (diagonal surplus s_i and split off-diagonals t+/t-), the
/// sdd side by one rotated-cone 2x2 block per index pair, so no
/// auxiliary equality rows are emitted.
struct InnerMembershipBlock {
    AffineMatrix m;  // U^T Q U
    AffineMatrix q;
    /// DD: diagonal surplus variable per index.
    std::vector<int> dd_diag;
    /// DD: (t+, t-) variable pair per index pair, selector order.
    std::vector<std::pair<int, int>> dd_off;
    /// SDD: head variable of the rotated-cone triple per index pair
    /// (for n == 1 the single nonnegative variable).
    std::vector<int> sdd_pairs;
};

InnerMembershipBlock emit_inner_membership(ProblemBuilder& pb, const BasisMatrix& u,
                                           Family family);

/// Appends the outer-approximation constraints on an affine X:
/// for DD the n^2 linear forms v_i^T (U X U^T) v_i >= 0, for SDD the
/// C(n,2) rotated-cone conditions V_i^T (U X U^T) V_i psd.
void emit_outer_membership(ProblemBuilder& pb, const BasisMatrix& u, Family family,
                           const AffineMatrix& x);

/// Certificate that M lies in family(U).
struct ConeDecomposition {
    Family family = Family::DD;
    int dimension = 0;
    /// DD: weight per extreme ray (dd_extreme_rays order).
    std::vector<double> ray_weights;
    /// SDD: 2x2 psd block per selector (sdd_block_selectors order).
    std::vector<SymMat> blocks;

    SymMat reassemble(const BasisMatrix& u) const;
};

/// Computes a decomposition certificate by one feasibility solve.
/// Throws NotInCone when the solve certifies infeasibility.
ConeDecomposition decompose(const SymMat& m, const BasisMatrix& u, Family family,
                            const SolverOptions& opts = {});

} // namespace cbp

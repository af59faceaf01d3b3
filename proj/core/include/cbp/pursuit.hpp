#pragma once

#include <optional>

#include "cbp/trace.hpp"

namespace cbp {

/// A semidefinite program in equality standard form
///   minimize C . X  subject to  A_i . X = b_i,  X psd.
struct SdpData {
    SymMat c;
    std::vector<std::pair<SymMat, double>> constraints;

    int order() const { return c.order(); }
    void validate() const;
};

/// Plain psd solve of the SDP (the reference every pursuit bound
/// approximates).  Returns the minimum value.
struct SdpSolveResult {
    ConicSolution solution;
    SymMat x;
    double value = 0.0;
};
SdpSolveResult solve_sdp(const SdpData& sdp, const SolverOptions& opts = {});

/// Upper-bound sequence: X constrained to DD(U_k) / SDD(U_k) with
/// U_{k+1} the regularized Cholesky factor of the iterate X_k.
/// Both the membership form (Q-parametrized) and the corner form
/// (weights on the mapped extreme rays) are available and agree.
/// Throws InfeasibleStart if iteration 0 is infeasible and the
/// Phase-I fallback is disabled or unsuccessful.
IterationTrace inner_sequence(const SdpData& sdp, const PursuitConfig& cfg);

struct Phase1Result {
    IterationTrace trace;        // alpha values
    std::optional<BasisMatrix> basis;  // set when alpha reached <= 0
    bool success = false;
};

/// Phase-I: minimize alpha with X + alpha I in the family cone, same
/// basis recursion.  Always feasible; success is alpha <= 0.
Phase1Result phase1(const SdpData& sdp, const PursuitConfig& cfg);

/// Lower-bound sequence via the dual-cone outer approximations; the
/// next basis is the regularized Cholesky factor of the dual slack
/// C - sum_i y_i A_i.  Records the matching dual value per iteration.
IterationTrace outer_sequence(const SdpData& sdp, const PursuitConfig& cfg);

/// Recast of the LMI pencil "maximize d . z subject to
/// F0 + sum_i z_i F_i psd" into equality standard form: X is pinned
/// to the affine plane F0 + span{F_i} by orthogonal-complement
/// equality constraints, and the objective becomes linear in X.
struct PencilSdp {
    SdpData sdp;
    SymMat f0;
    std::vector<SymMat> fi;
    /// Matrices reading the pencil coordinates back off X:
    /// z_k = <readers[k], X - F0>.
    std::vector<SymMat> readers;
    /// objective d . z = -(sdp minimum value) - shift
    double shift = 0.0;

    double objective_from_value(double sdp_min_value) const {
        return -sdp_min_value - shift;
    }
    std::vector<double> coordinates(const SymMat& x) const;
};

PencilSdp pencil_sdp(const SymMat& f0, const std::vector<SymMat>& fi,
                     const std::vector<double>& d);

} // namespace cbp

#pragma once

#include <string>
#include <vector>

#include "cbp/cones.hpp"

namespace cbp {

enum class Formulation : unsigned char { Membership, Corner };

const char* to_string(Formulation f);

/// One pursuit step: the bound obtained, where its basis came from,
/// and how the conic solve went.
struct IterationRecord {
    int k = 0;
    double value = 0.0;
    double dual_value = 0.0;
    BasisMatrix::Source basis_source = BasisMatrix::Source::Identity;
    double chol_shift = 0.0;
    int solver_iterations = 0;
    double gap = 0.0;
    SolveStatus solve_status = SolveStatus::Optimal;
};

struct IterationTrace {
    enum class Terminal : unsigned char { Converged, MaxIter, Infeasible, NumericalTrouble };
    std::vector<IterationRecord> records;
    Terminal status = Terminal::MaxIter;
    /// Iteration at which infeasibility was detected (-1 otherwise).
    int infeasible_at = -1;
    /// Set by refutation sequences once eps crosses the threshold.
    bool refuted = false;
    int refuted_at = -1;

    bool empty() const { return records.empty(); }
    double value_at(int k) const { return records.at(static_cast<size_t>(k)).value; }
    double last_value() const { return records.back().value; }
};

const char* to_string(IterationTrace::Terminal t);

/// Solver settings for pursuit runs: tighter than the stand-alone
/// defaults so per-iteration solver noise stays well below the
/// monotonicity slack asserted on traces.
inline SolverOptions pursuit_solver_defaults() {
    SolverOptions o;
    o.tol_feas = 1e-9;
    o.tol_gap = 1e-10;
    return o;
}

struct PursuitConfig {
    Family family = Family::DD;
    Formulation formulation = Formulation::Membership;
    int max_iter = 20;
    double rel_improve_tol = 1e-6;
    SolverOptions solver = pursuit_solver_defaults();
    /// Run the Phase-I sequence automatically when iteration 0 of an
    /// inner sequence is infeasible.
    bool phase1_fallback = true;
};

} // namespace cbp

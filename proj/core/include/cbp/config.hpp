#pragma once

namespace cbp {

/// All numeric tolerances used across the library, collected in one
/// place so a test or an application can tighten or relax them
/// consistently.  The defaults are the values assumed by the test
/// suites.
struct Tolerances {
    /// Eigen decomposition: reconstruction and orthogonality bound.
    double eig = 1e-10;
    /// Relative stop threshold for Jacobi off-diagonal mass.
    double jacobi_off = 1e-13;
    /// Sweep cap for the cyclic Jacobi eigensolver.
    int jacobi_max_sweeps = 42;

    /// Base regularization for Cholesky factors of pursuit iterates:
    /// reg = chol_reg_scale * (1 + trace(A)/n).
    double chol_reg_scale = 1e-10;

    /// Interior-point feasibility / duality-gap defaults.
    double solver_feas = 1e-8;
    double solver_gap = 1e-8;
    /// Residual bound for infeasibility certificates.
    double solver_cert = 1e-8;

    /// Membership tests (is_sdd, Gram reconstruction, cone reassembly).
    double membership = 1e-8;

    /// A partition instance counts as refuted once eps exceeds this.
    double refute_eps = 1e-7;

    static const Tolerances& defaults() {
        static const Tolerances t{};
        return t;
    }
};

} // namespace cbp

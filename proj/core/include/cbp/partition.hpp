#pragma once

#include <cstdint>

#include "cbp/rng.hpp"
#include "cbp/sosprog.hpp"

namespace cbp {

struct PartitionInstance {
    std::vector<long long> a;

    int size() const { return static_cast<int>(a.size()); }
    long long sum() const;
    void validate() const;  // all entries >= 1, at least one entry
};

/// Subset-sum oracle: can the numbers be split into two equal-sum
/// halves?  Dynamic programming over a bitset; throws TooLarge when
/// the sum exceeds the DP budget.
bool partition_feasible(const PartitionInstance& inst);

/// p_a(x) = sum_i (x_i^2 - 1)^2 + (sum_i a_i x_i)^2.
Polynomial build_pa(const PartitionInstance& inst);

struct Homogenized {
    Polynomial p_h;  // the homogenized quartic form
    Polynomial h;    // ((1/n) sum x_i^2)^2
};

/// Homogenization: lower-degree monomials of p_a are padded with
/// powers of (1/n) sum x_i^2; the infeasibility program then reads
/// "maximize eps with p_h - eps h in the cone".
Homogenized homogenize(const PartitionInstance& inst);

struct RefuteSosResult {
    SolveStatus status = SolveStatus::NumericalTrouble;
    double eps = 0.0;
    std::optional<GramCertificate> certificate;
    /// The polynomial the certificate proves nonnegative:
    /// (p_a - eps)(sum x_i^2 + 1)^r, resp. p_h - eps h.
    Polynomial certified;
};

/// maximize eps with (p_a - eps)(sum x_i^2 + 1)^r a sum of squares
/// (r = 0 is the plain sos refutation).  eps > 0 refutes the instance.
RefuteSosResult refute_sos(const PartitionInstance& inst, int r,
                           const SolverOptions& opts = {});

/// Homogeneous variant: maximize eps with p_h - eps h sos.
RefuteSosResult refute_sos_homogeneous(const PartitionInstance& inst,
                                       const SolverOptions& opts = {});

/// maximize eps with p_a - eps dsos/sdsos (no homogenization).  This
/// program can be infeasible outright; the result reports it.
EpsResult nonhomogeneous_family_eps(const PartitionInstance& inst, Family family,
                                    const SolverOptions& opts = {});

/// LP/SOCP refutation sequence over the homogeneous form.  The trace
/// is flagged refuted as soon as eps exceeds the threshold in
/// Tolerances::refute_eps, and the run stops there.
IterationTrace refute_sequence(const PartitionInstance& inst, Family family, int max_iter,
                               const SolverOptions& opts = pursuit_solver_defaults());

/// The separating functional showing {1,1,1,1,1} is not sos-refutable:
/// a linear functional on quartic coefficients that vanishes on p_a,
/// is nonnegative on sos quartics (its moment matrix is psd), and is
/// -eps on p_a - eps.
struct SeparatingFunctional {
    /// Reduced vector paired against (constant, x_i^2, x_i x_j, x_i^4)
    /// coefficient blocks of p_a.
    std::vector<double> mu_reduced;
    /// Moment matrix over z = [1, x_i, x_i^2, x_i x_j] (21 x 21).
    SymMat moment_matrix;
    double a = 0.375;   // value on x_i x_j x_k x_l, all indices distinct
    double b = -0.25;   // value on x_i x_j and on degree-4 monomials with
                        // an odd variable

    /// mu evaluated on a monomial of degree <= 4 in 5 variables.
    double value_on(const Exponents& mono) const;
    /// <mu, q> summed over the coefficients of q.
    double pair_with(const Polynomial& q) const;
    /// Exact check that <mu, p_a> = 0 for a = {1,1,1,1,1}; computed in
    /// integers (all mu values are multiples of 1/8).
    bool vanishes_on_all_ones() const;
};

SeparatingFunctional build_prop55_witness();

struct Table2Row {
    int instance = 0;
    std::vector<long long> numbers;
    double sos_eps = 0.0;
    double sos_hom_eps = 0.0;
    bool sos_success = false;
    bool sos_hom_success = false;
    int dsos_refuted_at = -1;   // iteration index, -1 if never
    int sdsos_refuted_at = -1;
    double wall_seconds = 0.0;
};

/// Refutation-rate experiment on `count` seeded odd-sum instances with
/// `size` entries drawn from [1, max_value].
std::vector<Table2Row> table2_experiment(std::uint64_t seed, int count, int size,
                                         int max_value, int sequence_iters);

PartitionInstance random_odd_sum_instance(Rng& rng, int size, int lo, int hi);

} // namespace cbp

#include "cbp/partition.hpp"

#include <chrono>
#include <cmath>

namespace cbp {

long long PartitionInstance::sum() const {
    long long s = 0;
    for (long long v : a) s += v;
    return s;
}

void PartitionInstance::validate() const {
    if (a.empty()) throw InvalidInput("PartitionInstance: needs at least one entry");
    for (long long v : a)
        if (v < 1) throw InvalidInput("PartitionInstance: entries must be >= 1");
}

bool partition_feasible(const PartitionInstance& inst) {
    inst.validate();
    const long long total = inst.sum();
    if (total % 2 != 0) return false;
    const long long half = total / 2;
    if (half > 20'000'000) throw TooLarge("partition_feasible: sum exceeds the DP budget");
    const size_t words = static_cast<size_t>(half / 64) + 1;
    std::vector<std::uint64_t> reach(words, 0);
    reach[0] = 1;  // empty subset
    for (long long v : inst.a) {
        if (v > half) continue;
        const size_t wshift = static_cast<size_t>(v / 64);
        const int bshift = static_cast<int>(v % 64);
        for (size_t w = words; w-- > 0;) {
            if (w < wshift) break;
            std::uint64_t bits = reach[w - wshift];
            std::uint64_t shifted = bshift == 0 ? bits : (bits << bshift);
            if (bshift != 0 && w - wshift > 0)
                shifted |= reach[w - wshift - 1] >> (64 - bshift);
            reach[w] |= shifted;
        }
    }
    return (reach[static_cast<size_t>(half / 64)] >> (half % 64)) & 1;
}

Polynomial build_pa(const PartitionInstance& inst) {
    inst.validate();
    const int n = inst.size();
    // sum (x_i^2 - 1)^2 + (sum a_i x_i)^2 expanded:
    //   sum x_i^4 + sum (a_i^2 - 2) x_i^2 + 2 sum_{i<j} a_i a_j x_i x_j + n
    Polynomial p(n);
    Exponents e(n, 0);
    p.add_term(e, static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        e.assign(n, 0);
        e[i] = 4;
        p.add_term(e, 1.0);
        e[i] = 2;
        p.add_term(e, static_cast<double>(inst.a[i]) * inst.a[i] - 2.0);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            e.assign(n, 0);
            e[i] = 1;
            e[j] = 1;
            p.add_term(e, 2.0 * inst.a[i] * inst.a[j]);
        }
    return p;
}

Homogenized homogenize(const PartitionInstance& inst) {
    inst.validate();
    const int n = inst.size();
    Polynomial theta(n);  // (1/n) sum x_i^2
    for (int i = 0; i < n; ++i) {
        Exponents e(n, 0);
        e[i] = 2;
        theta.add_term(e, 1.0 / n);
    }
    // p_h = sum x_i^4 + ((sum a_i x_i)^2 - 2 sum x_i^2) theta + n theta^2
    Polynomial quartics(n);
    Polynomial mid(n);
    for (int i = 0; i < n; ++i) {
        Exponents e(n, 0);
        e[i] = 4;
        quartics.add_term(e, 1.0);
        e[i] = 2;
        mid.add_term(e, static_cast<double>(inst.a[i]) * inst.a[i] - 2.0);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Exponents e(n, 0);
            e[i] = 1;
            e[j] = 1;
            mid.add_term(e, 2.0 * inst.a[i] * inst.a[j]);
        }
    Homogenized out;
    out.h = theta * theta;
    out.p_h = quartics + mid * theta + static_cast<double>(n) * out.h;
    return out;
}

namespace {

Polynomial multiplier_poly(int n, int r) {
    Polynomial m = Polynomial::constant(n, 1.0);
    for (int i = 0; i < n; ++i) {
        Exponents e(n, 0);
        e[i] = 2;
        m.add_term(e, 1.0);
    }
    return m.pow(r);
}

} // namespace

RefuteSosResult refute_sos(const PartitionInstance& inst, int r, const SolverOptions& opts) {
    inst.validate();
    if (r < 0 || r > 2) throw InvalidInput("refute_sos: r must be in {0, 1, 2}");
    const int n = inst.size();
    const Polynomial w = multiplier_poly(n, r);
    const Polynomial p = build_pa(inst) * w;
    const MonomialBasis basis = MonomialBasis::up_to(n, 2 + r);
    const auto eps = optimize_eps(p, w, basis, BasisMatrix::identity(basis.size()),
                                  GramFamily::PSD, opts);
    RefuteSosResult out;
    out.status = eps.status;
    out.eps = eps.eps;
    out.certificate = eps.certificate;
    if (eps.status == SolveStatus::Optimal) {
        Polynomial weps = w;
        weps *= -eps.eps;
        out.certified = p + weps;
    }
    return out;
}

RefuteSosResult refute_sos_homogeneous(const PartitionInstance& inst,
                                       const SolverOptions& opts) {
    inst.validate();
    const auto hom = homogenize(inst);
    const MonomialBasis basis = MonomialBasis::exact(inst.size(), 2);
    const auto eps = optimize_eps(hom.p_h, hom.h, basis,
                                  BasisMatrix::identity(basis.size()), GramFamily::PSD,
                                  opts);
    RefuteSosResult out;
    out.status = eps.status;
    out.eps = eps.eps;
    out.certificate = eps.certificate;
    if (eps.status == SolveStatus::Optimal) {
        Polynomial heps = hom.h;
        heps *= -eps.eps;
        out.certified = hom.p_h + heps;
    }
    return out;
}

EpsResult nonhomogeneous_family_eps(const PartitionInstance& inst, Family family,
                                    const SolverOptions& opts) {
    inst.validate();
    const int n = inst.size();
    const Polynomial p = build_pa(inst);
    const Polynomial one = Polynomial::constant(n, 1.0);
    const MonomialBasis basis = MonomialBasis::up_to(n, 2);
    return optimize_eps(p, one, basis, BasisMatrix::identity(basis.size()),
                        to_gram(family), opts);
}

IterationTrace refute_sequence(const PartitionInstance& inst, Family family, int max_iter,
                               const SolverOptions& opts) {
    inst.validate();
    const auto hom = homogenize(inst);
    const MonomialBasis basis = MonomialBasis::exact(inst.size(), 2);
    PursuitConfig cfg;
    cfg.family = family;
    cfg.max_iter = max_iter;
    cfg.solver = opts;
    cfg.rel_improve_tol = 0.0;  // run the advertised number of iterations
    return poly_inner_sequence(hom.p_h, hom.h, basis, cfg,
                               Tolerances::defaults().refute_eps);
}

double SeparatingFunctional::value_on(const Exponents& mono) const {
    int deg = 0;
    int odd = 0;
    int max_e = 0;
    int support = 0;
    for (int e : mono) {
        deg += e;
        if (e % 2 == 1) ++odd;
        if (e > 0) ++support;
        max_e = std::max(max_e, e);
    }
    if (deg > 4) throw InvalidInput("SeparatingFunctional: degree above 4");
    if (deg % 2 == 1 || odd > 0) {
        // any monomial with an odd variable pairs to b only via the
        // specific degree-4 patterns; plain odd-degree monomials vanish
        if (deg == 2 && support == 2) return b;          // x_i x_j
        if (deg == 4 && support == 2 && max_e == 3) return b;  // x_i^3 x_j
        if (deg == 4 && support == 3) return b;          // x_i^2 x_j x_k
        if (deg == 4 && support == 4) return a;          // x_i x_j x_k x_l
        return 0.0;
    }
    // all remaining patterns (1, x_i^2, x_i^4, x_i^2 x_j^2) pair to 1
    return 1.0;
}

double SeparatingFunctional::pair_with(const Polynomial& q) const {
    if (q.num_vars() != 5)
        throw InvalidInput("SeparatingFunctional: expects 5 variables");
    double acc = 0.0;
    for (const auto& [e, c] : q.terms()) acc += c * value_on(e);
    return acc;
}

bool SeparatingFunctional::vanishes_on_all_ones() const {
    // 8 * <mu, p> over the integer coefficient blocks of p for
    // a = {1,1,1,1,1}:  constant 5, x_i^2 coefficient -1 (5 terms),
    // x_i x_j coefficient 2 (10 terms), x_i^4 coefficient 1 (5 terms)
    const long long eight_mu_const = 8, eight_mu_sq = 8, eight_mu_cross = -2,
                    eight_mu_quart = 8;
    const long long total = 5 * eight_mu_const + 5 * (-1) * eight_mu_sq +
                            10 * 2 * eight_mu_cross + 5 * 1 * eight_mu_quart;
    return total == 0;
}

SeparatingFunctional build_prop55_witness() {
    SeparatingFunctional f;
    f.mu_reduced.assign(21, 0.0);
    f.mu_reduced[0] = 1.0;
    for (int i = 1; i <= 5; ++i) f.mu_reduced[i] = 1.0;        // on x_i^2
    for (int i = 6; i < 16; ++i) f.mu_reduced[i] = -0.25;      // on x_i x_j
    for (int i = 16; i < 21; ++i) f.mu_reduced[i] = 1.0;       // on x_i^4

    // moment matrix over z = [1, x_1..x_5, x_1^2..x_5^2, x_1x_2, ..., x_4x_5]
    const int n = 5;
    std::vector<Exponents> z;
    z.push_back(Exponents(n, 0));
    for (int i = 0; i < n; ++i) {
        Exponents e(n, 0);
        e[i] = 1;
        z.push_back(e);
    }
    for (int i = 0; i < n; ++i) {
        Exponents e(n, 0);
        e[i] = 2;
        z.push_back(e);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Exponents e(n, 0);
            e[i] = 1;
            e[j] = 1;
            z.push_back(e);
        }
    const int zn = static_cast<int>(z.size());
    f.moment_matrix = SymMat(zn);
    Exponents prod(n);
    for (int r = 0; r < zn; ++r)
        for (int c2 = r; c2 < zn; ++c2) {
            for (int v = 0; v < n; ++v) prod[v] = z[r][v] + z[c2][v];
            f.moment_matrix.set(r, c2, f.value_on(prod));
        }
    return f;
}

PartitionInstance random_odd_sum_instance(Rng& rng, int size, int lo, int hi) {
    PartitionInstance inst;
    while (true) {
        inst.a.clear();
        for (int i = 0; i < size; ++i) inst.a.push_back(rng.uniform_int(lo, hi));
        if (inst.sum() % 2 == 1) return inst;
    }
}

std::vector<Table2Row> table2_experiment(std::uint64_t seed, int count, int size,
                                         int max_value, int sequence_iters) {
    std::vector<Table2Row> rows;
    rows.reserve(count);
    Rng rng(seed);
    const double thresh = 1e-6;
    for (int inst_id = 0; inst_id < count; ++inst_id) {
        const auto t0 = std::chrono::steady_clock::now();
        const PartitionInstance inst = random_odd_sum_instance(rng, size, 1, max_value);
        Table2Row row;
        row.instance = inst_id;
        row.numbers = inst.a;
        const auto sos = refute_sos(inst, 0);
        row.sos_eps = sos.eps;
        row.sos_success = sos.status == SolveStatus::Optimal && sos.eps > thresh;
        const auto hom = refute_sos_homogeneous(inst);
        row.sos_hom_eps = hom.eps;
        row.sos_hom_success = hom.status == SolveStatus::Optimal && hom.eps > thresh;
        const auto dd = refute_sequence(inst, Family::DD, sequence_iters + 1);
        row.dsos_refuted_at = dd.refuted ? dd.refuted_at : -1;
        const auto sdd = refute_sequence(inst, Family::SDD, sequence_iters + 1);
        row.sdsos_refuted_at = sdd.refuted ? sdd.refuted_at : -1;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cbp

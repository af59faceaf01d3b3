#include "cbp/stableset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace cbp {

void Graph::add_edge(int i, int j) {
    if (i == j) throw InvalidInput("Graph: self loop");
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n) throw InvalidInput("Graph: node out of range");
    const std::pair<int, int> e{i, j};
    auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it == edges.end() || *it != e) edges.insert(it, e);
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges.begin(), edges.end(), std::pair<int, int>{i, j});
}

void Graph::validate() const {
    if (n < 1) throw InvalidInput("Graph: needs at least one node");
    for (auto [i, j] : edges)
        if (i < 0 || j >= n || i >= j) throw InvalidInput("Graph: bad edge");
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw InvalidInput("Graph: duplicate edge");
    if (!std::is_sorted(edges.begin(), edges.end()))
        throw InvalidInput("Graph: edge list not sorted");
}

Graph Graph::complement() const {
    Graph g = Graph::empty(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!has_edge(i, j)) g.edges.emplace_back(i, j);
    return g;
}

Graph Graph::complete(int n) {
    Graph g = Graph::empty(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
    return g;
}

Graph Graph::cycle(int n) {
    Graph g = Graph::empty(n);
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
    return g;
}

Graph Graph::petersen() {
    // outer 5-cycle 0..4, inner pentagram 5..9, spokes i -- i+5
    Graph g = Graph::empty(10);
    for (int i = 0; i < 5; ++i) {
        g.add_edge(i, (i + 1) % 5);
        g.add_edge(5 + i, 5 + (i + 2) % 5);
        g.add_edge(i, i + 5);
    }
    return g;
}

Graph gnp_graph(int n, double edge_prob, std::uint64_t seed) {
    Rng rng(seed);
    Graph g = Graph::empty(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < edge_prob) g.edges.emplace_back(i, j);
    return g;
}

double lp_relaxation(const Graph& g, const SolverOptions& opts) {
    return clique_lp(g, 2, opts);
}

double clique_lp(const Graph& g, int k, const SolverOptions& opts) {
    g.validate();
    if (k != 2 && k != 3) throw UnsupportedK("clique_lp: only k in {2, 3}");
    ProblemBuilder pb;
    std::vector<int> x(g.n);
    LinExpr obj;
    for (int i = 0; i < g.n; ++i) {
        x[i] = pb.add_nonneg(1);
        obj.add(x[i], 1.0);
    }
    pb.set_objective(obj, /*maximize=*/true);
    for (int i = 0; i < g.n; ++i) {
        LinExpr ub = LinExpr(1.0);
        ub.add(x[i], -1.0);
        pb.add_ineq_ge0(ub);  // x_i <= 1
    }
    for (auto [i, j] : g.edges) {
        LinExpr e = LinExpr(1.0);
        e.add(x[i], -1.0).add(x[j], -1.0);
        pb.add_ineq_ge0(e);  // x_i + x_j <= 1
    }
    if (k >= 3) {
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j) {
                if (!g.has_edge(i, j)) continue;
                for (int l = j + 1; l < g.n; ++l) {
                    if (!g.has_edge(i, l) || !g.has_edge(j, l)) continue;
                    LinExpr e = LinExpr(1.0);
                    e.add(x[i], -1.0).add(x[j], -1.0).add(x[l], -1.0);
                    pb.add_ineq_ge0(e);
                }
            }
    }
    const auto sol = solve(pb.build(), opts);
    if (sol.status != SolveStatus::Optimal)
        throw SolverFailure(std::string("clique_lp: solver status ") +
                            to_string(sol.status));
    return pb.objective_value(sol);
}

SdpData theta_sdp(const Graph& g) {
    g.validate();
    const int n = g.n;
    SdpData sdp;
    sdp.c = SymMat(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sdp.c.set(i, j, -1.0);  // minimize -J.X
    sdp.constraints.emplace_back(SymMat::identity(n), 1.0);
    for (auto [i, j] : g.edges) {
        SymMat e(n);
        e.set(i, j, 1.0);
        sdp.constraints.emplace_back(e, 0.0);
    }
    return sdp;
}

ConicProblem lovasz_theta_problem(const Graph& g) {
    const SdpData sdp = theta_sdp(g);
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
    return p;
}

double lovasz_theta(const Graph& g, const SolverOptions& opts) {
    const auto res = solve_sdp(theta_sdp(g), opts);
    if (res.solution.status != SolveStatus::Optimal)
        throw SolverFailure(std::string("lovasz_theta: solver status ") +
                            to_string(res.solution.status));
    return -res.value;
}

IterationTrace theta_bound_sequence(const Graph& g, Family family, int max_iter,
                                    const SolverOptions& opts) {
    PursuitConfig cfg;
    cfg.family = family;
    cfg.max_iter = max_iter;
    cfg.solver = opts;
    cfg.rel_improve_tol = 0.0;  // always produce max_iter bounds
    IterationTrace trace = outer_sequence(theta_sdp(g), cfg);
    // report upper bounds on theta (negate the min-form values)
    for (auto& rec : trace.records) {
        rec.value = -rec.value;
        rec.dual_value = -rec.dual_value;
    }
    return trace;
}

namespace {

void alpha_branch(const std::vector<std::uint64_t>& adj, std::uint64_t candidates,
                  int current, int& best) {
    if (candidates == 0) {
        best = std::max(best, current);
        return;
    }
    // bound: even taking every remaining candidate cannot beat best
    if (current + __builtin_popcountll(candidates) <= best) return;
    const int v = __builtin_ctzll(candidates);
    const std::uint64_t bit = std::uint64_t{1} << v;
    // branch: v in the stable set (drop v and its neighbours) ...
    alpha_branch(adj, candidates & ~(adj[v] | bit), current + 1, best);
    // ... or not
    alpha_branch(adj, candidates & ~bit, current, best);
}

} // namespace

int alpha_exact(const Graph& g) {
    g.validate();
    if (g.n > 30) throw TooLarge("alpha_exact: more than 30 nodes");
    std::vector<std::uint64_t> adj(g.n, 0);
    for (auto [i, j] : g.edges) {
        adj[i] |= std::uint64_t{1} << j;
        adj[j] |= std::uint64_t{1} << i;
    }
    int best = 0;
    const std::uint64_t all = (g.n == 64) ? ~std::uint64_t{0}
                                          : ((std::uint64_t{1} << g.n) - 1);
    alpha_branch(adj, all, 0, best);
    return best;
}

std::vector<Table1Row> table1_experiment(std::uint64_t seed, int count, int nodes,
                                         double edge_prob, int dsos_iters,
                                         int sdsos_iters) {
    std::vector<Table1Row> rows;
    rows.reserve(count);
    for (int inst = 0; inst < count; ++inst) {
        const auto t0 = std::chrono::steady_clock::now();
        const Graph g = gnp_graph(nodes, edge_prob, seed + static_cast<std::uint64_t>(inst));
        Table1Row row;
        row.instance = inst;
        row.alpha = alpha_exact(g);
        row.theta = lovasz_theta(g);
        row.lp = lp_relaxation(g);
        row.lp3 = clique_lp(g, 3);
        const auto dd = theta_bound_sequence(g, Family::DD, dsos_iters + 1);
        for (const auto& rec : dd.records) row.dsos.push_back(rec.value);
        const auto sdd = theta_bound_sequence(g, Family::SDD, sdsos_iters + 1);
        for (const auto& rec : sdd.records) row.sdsos.push_back(rec.value);
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cbp

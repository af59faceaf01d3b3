#pragma once

#include <cstdint>

#include "cbp/pursuit.hpp"
#include "cbp/rng.hpp"

namespace cbp {

/// Simple undirected graph: nodes 0..n-1, edge list kept sorted with
/// i < j and no duplicates.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    void add_edge(int i, int j);
    bool has_edge(int i, int j) const;
    int num_edges() const { return static_cast<int>(edges.size()); }
    void validate() const;
    Graph complement() const;

    static Graph empty(int n) { return Graph{n, {}}; }
    static Graph complete(int n);
    static Graph cycle(int n);
    static Graph petersen();
    static Graph petersen_complement() { return petersen().complement(); }
};

/// Erdos-Renyi G(n, p) from a seeded generator; pair order is fixed so
/// the same seed always gives the same graph.
Graph gnp_graph(int n, double edge_prob, std::uint64_t seed);

/// Edge relaxation max sum x_i, x in [0,1]^n, x_i + x_j <= 1 on edges.
double lp_relaxation(const Graph& g, const SolverOptions& opts = {});

/// Edge relaxation with all clique inequalities up to size k; only
/// k = 2 (edges) and k = 3 (triangles) are enumerated.
double clique_lp(const Graph& g, int k, const SolverOptions& opts = {});

/// The Lovasz theta SDP in our standard form (min -J.X so the optimal
/// value is -theta).
SdpData theta_sdp(const Graph& g);

double lovasz_theta(const Graph& g, const SolverOptions& opts = {});

/// Standard-form conic problem of the theta SDP (single psd block),
/// for callers that want the optimal X itself.
ConicProblem lovasz_theta_problem(const Graph& g);

/// Upper bounds on theta via the dd/sdd outer approximations with the
/// dual-slack Cholesky basis recursion.  Values are reported in the
/// maximization convention (a non-increasing trace of bounds >= theta).
IterationTrace theta_bound_sequence(const Graph& g, Family family, int max_iter,
                                    const SolverOptions& opts = pursuit_solver_defaults());

/// Exact stability number by branch and bound; throws TooLarge above
/// 30 nodes.
int alpha_exact(const Graph& g);

struct Table1Row {
    int instance = 0;
    int alpha = 0;
    double theta = 0.0;
    double lp = 0.0;
    double lp3 = 0.0;
    std::vector<double> dsos;   // DSOS_0 .. DSOS_k
    std::vector<double> sdsos;  // SDSOS_0 .. SDSOS_k
    double wall_seconds = 0.0;
};

/// Bound comparison on `count` seeded G(nodes, edge_prob) instances.
std::vector<Table1Row> table1_experiment(std::uint64_t seed, int count, int nodes,
                                         double edge_prob, int dsos_iters,
                                         int sdsos_iters);

} // namespace cbp

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avglearn/matrix.hpp"

namespace avglearn {

// Adjacency-list digraph; vertices are 0-based in code, 1-based in all
// serialized output (DOT, JSON).
struct DiGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;

    DiGraph() = default;
    explicit DiGraph(int n) : n(n), adj(n) {}
    void add_arc(int i, int j);
    bool has_arc(int i, int j) const;
    std::size_t arc_count() const;
};

// Arc (i,j) present iff |M(i,j)| > zero_tol.
DiGraph build_digraph(const Matrix& m, double zero_tol = 0.0);

struct SccDecomposition {
    std::vector<int> component_of;            // vertex -> scc id
    std::vector<std::vector<int>> components;  // scc id -> sorted vertices
    DiGraph condensation;                      // over scc ids, acyclic
    std::vector<int> sinks;                    // scc ids with outdegree 0, sorted
    // Period per scc; nullopt marks a single vertex without a self-loop.
    std::vector<std::optional<int>> periods;
};

SccDecomposition strongly_connected_components(const DiGraph& g);

// Period (gcd of cycle lengths) of a strongly connected vertex set of g,
// via BFS levels: gcd over induced arcs (u,v) of level(u) + 1 - level(v).
// Returns nullopt for a single vertex without a self-loop.
std::optional<int> scc_period(const DiGraph& g, const std::vector<int>& scc);

bool is_condensely_aperiodic(const Matrix& m, double zero_tol = 0.0);

struct AnchorReport {
    std::vector<int> anchors;
    std::vector<int> defective;
    std::vector<int> overlearners;  // E(i) >= 2 A(i,i), E(i) > 0
    bool condensely_anchored = false;
    // Shortest walk from each vertex to an anchor in G[A - diag(E)], as a
    // vertex sequence ending at the anchor; nullopt when no anchor is reachable.
    std::vector<std::optional<std::vector<int>>> witness_walks;
};

// Agent classification only (Def: anchor iff 0 < E(i) < 2 A(i,i)).
AnchorReport anchors(const Matrix& a, const LearningRates& e);

// Full report including the sink-SCC test and witness walks.
AnchorReport is_condensely_anchored(const Matrix& a, const LearningRates& e, double zero_tol = 0.0);

// Largest over all vertices of the shortest walk length in G[B] to a row
// whose row sum is < 1; nullopt means some vertex reaches no deficient row.
std::optional<int> index_of_contraction(const Matrix& b, double stoch_tol = kStochTol,
                                        double zero_tol = 0.0);

std::string to_dot(const DiGraph& g);
std::string condensation_to_dot(const SccDecomposition& d);

}  // namespace avglearn

#include "avglearn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <stack>

namespace avglearn {

void DiGraph::add_arc(int i, int j) {
    if (i < 0 || i >= n || j < 0 || j >= n) throw InvalidInput("arc endpoint out of range");
    if (!has_arc(i, j)) adj[i].push_back(j);
}

bool DiGraph::has_arc(int i, int j) const {
    return std::find(adj[i].begin(), adj[i].end(), j) != adj[i].end();
}

std::size_t DiGraph::arc_count() const {
    std::size_t c = 0;
    for (const auto& row : adj) c += row.size();
    return c;
}

DiGraph build_digraph(const Matrix& m, double zero_tol) {
    if (zero_tol < 0.0) throw InvalidInput("zero_tol must be nonnegative");
    if (!m.all_finite()) throw InvalidMatrix("matrix has non-finite entries");
    const int n = m.size();
    DiGraph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(m(i, j)) > zero_tol) g.adj[i].push_back(j);
    return g;
}

namespace {

// Iterative Tarjan; avoids recursion limits on long paths.
struct TarjanState {
    const DiGraph& g;
    std::vector<int> index, lowlink, component_of;
    std::vector<bool> on_stack;
    std::stack<int> stack;
    int next_index = 0;
    int next_comp = 0;

    explicit TarjanState(const DiGraph& g)
        : g(g), index(g.n, -1), lowlink(g.n, 0), component_of(g.n, -1), on_stack(g.n, false) {}

    void run(int root) {
        struct Frame {
            int v;
            std::size_t child;
        };
        std::stack<Frame> frames;
        frames.push({root, 0});
        index[root] = lowlink[root] = next_index++;
        stack.push(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.top();
            const int v = f.v;
            if (f.child < g.adj[v].size()) {
                const int w = g.adj[v][f.child++];
                if (index[w] == -1) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push({w, 0});
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], index[w]);
                }
            } else {
                if (lowlink[v] == index[v]) {
                    while (true) {
                        const int w = stack.top();
                        stack.pop();
                        on_stack[w] = false;
                        component_of[w] = next_comp;
                        if (w == v) break;
                    }
                    ++next_comp;
                }
                frames.pop();
                if (!frames.empty()) {
                    const int parent = frames.top().v;
                    lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
                }
            }
        }
    }
};

}  // namespace

std::optional<int> scc_period(const DiGraph& g, const std::vector<int>& scc) {
    if (scc.empty()) throw NotAnScc("empty vertex set");
    // Validate strong connectivity of the induced subgraph.
    std::vector<int> in_scc(g.n, 0);
    for (int v : scc) {
        if (v < 0 || v >= g.n) throw NotAnScc("vertex out of range");
        in_scc[v] = 1;
    }
    auto reach_all = [&](bool reversed) {
        std::vector<bool> seen(g.n, false);
        std::queue<int> q;
        q.push(scc[0]);
        seen[scc[0]] = true;
        std::size_t count = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int u = 0; u < g.n; ++u) {
                const int from = reversed ? u : v;
                const int to = reversed ? v : u;
                if (!in_scc[u] || seen[u] || !g.has_arc(from, to)) continue;
                seen[u] = true;
                ++count;
                q.push(u);
            }
        }
        return count == scc.size();
    };
    if (!reach_all(false) || !reach_all(true)) throw NotAnScc("vertex set is not strongly connected");

    if (scc.size() == 1 && !g.has_arc(scc[0], scc[0])) return std::nullopt;

    // BFS levels from an arbitrary root; gcd over induced arcs of
    // level(u) + 1 - level(v).
    std::vector<int> level(g.n, -1);
    std::queue<int> q;
    q.push(scc[0]);
    level[scc[0]] = 0;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : g.adj[v]) {
            if (!in_scc[w] || level[w] != -1) continue;
            level[w] = level[v] + 1;
            q.push(w);
        }
    }
    int gcd = 0;
    for (int u : scc)
        for (int w : g.adj[u])
            if (in_scc[w]) gcd = std::gcd(gcd, std::abs(level[u] + 1 - level[w]));
    return gcd;
}

SccDecomposition strongly_connected_components(const DiGraph& g) {
    TarjanState t(g);
    for (int v = 0; v < g.n; ++v)
        if (t.index[v] == -1) t.run(v);

    SccDecomposition d;
    const int k = t.next_comp;
    d.component_of = std::move(t.component_of);
    d.components.assign(k, {});
    for (int v = 0; v < g.n; ++v) d.components[d.component_of[v]].push_back(v);
    for (auto& c : d.components) std::sort(c.begin(), c.end());

    d.condensation = DiGraph(k);
    for (int v = 0; v < g.n; ++v)
        for (int w : g.adj[v]) {
            const int cv = d.component_of[v];
            const int cw = d.component_of[w];
            if (cv != cw) d.condensation.add_arc(cv, cw);
        }
    for (int c = 0; c < k; ++c)
        if (d.condensation.adj[c].empty()) d.sinks.push_back(c);

    d.periods.resize(k);
    for (int c = 0; c < k; ++c) d.periods[c] = scc_period(g, d.components[c]);
    return d;
}

bool is_condensely_aperiodic(const Matrix& m, double zero_tol) {
    const auto d = strongly_connected_components(build_digraph(m, zero_tol));
    for (int s : d.sinks) {
        const auto& p = d.periods[s];
        if (p.has_value() && *p != 1) return false;  // nullopt = loop-free single vertex, allowed
    }
    return true;
}

namespace {

std::vector<int> classify_agent_sets(const Matrix& a, const LearningRates& e, AnchorReport& report) {
    const int n = a.size();
    std::vector<int> is_anchor(n, 0);
    for (int i = 0; i < n; ++i) {
        const double rate = e(i);
        if (rate == 0.0) {
            report.defective.push_back(i);
        } else if (rate < 2.0 * a(i, i)) {
            report.anchors.push_back(i);
            is_anchor[i] = 1;
        } else {
            report.overlearners.push_back(i);
        }
    }
    return is_anchor;
}

}  // namespace

AnchorReport anchors(const Matrix& a, const LearningRates& e) {
    if (a.size() != e.size()) throw InvalidInput("rate/matrix dimension mismatch");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidInput("A must be row stochastic");
    AnchorReport report;
    classify_agent_sets(a, e, report);
    return report;
}

AnchorReport is_condensely_anchored(const Matrix& a, const LearningRates& e, double zero_tol) {
    if (a.size() != e.size()) throw InvalidInput("rate/matrix dimension mismatch");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidInput("A must be row stochastic");
    const int n = a.size();
    AnchorReport report;
    const std::vector<int> is_anchor = classify_agent_sets(a, e, report);

    const DiGraph g = build_digraph(subtract_rates(a, e), zero_tol);
    // Reverse multi-source BFS from the anchor set gives shortest walks to anchors.
    DiGraph rev(n);
    for (int v = 0; v < n; ++v)
        for (int w : g.adj[v]) rev.adj[w].push_back(v);
    std::vector<int> next_hop(n, -1), dist(n, -1);
    std::queue<int> q;
    for (int v : report.anchors) {
        dist[v] = 0;
        next_hop[v] = v;
        q.push(v);
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int u : rev.adj[v]) {
            if (dist[u] != -1) continue;
            dist[u] = dist[v] + 1;
            next_hop[u] = v;
            q.push(u);
        }
    }
    report.witness_walks.resize(n);
    for (int v = 0; v < n; ++v) {
        if (dist[v] == -1) continue;
        std::vector<int> walk{v};
        for (int u = v; !is_anchor[u]; u = next_hop[u]) walk.push_back(next_hop[u]);
        report.witness_walks[v] = std::move(walk);
    }

    const auto d = strongly_connected_components(g);
    report.condensely_anchored = true;
    for (int s : d.sinks) {
        const bool has_anchor =
            std::any_of(d.components[s].begin(), d.components[s].end(), [&](int v) { return is_anchor[v]; });
        if (!has_anchor) {
            report.condensely_anchored = false;
            break;
        }
    }
    return report;
}

std::optional<int> index_of_contraction(const Matrix& b, double stoch_tol, double zero_tol) {
    const RowClass rc = b.row_class(stoch_tol);
    if (rc == RowClass::General) throw NotSubstochastic("matrix is not row substochastic");
    const int n = b.size();
    const DiGraph g = build_digraph(b, zero_tol);
    DiGraph rev(n);
    for (int v = 0; v < n; ++v)
        for (int w : g.adj[v]) rev.adj[w].push_back(v);
    // Reverse BFS from all deficient rows at once.
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    for (int v = 0; v < n; ++v) {
        if (b.row_sum(v) < 1.0 - stoch_tol) {
            dist[v] = 0;
            q.push(v);
        }
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int u : rev.adj[v]) {
            if (dist[u] != -1) continue;
            dist[u] = dist[v] + 1;
            q.push(u);
        }
    }
    int worst = 0;
    for (int v = 0; v < n; ++v) {
        if (dist[v] == -1) return std::nullopt;
        worst = std::max(worst, dist[v]);
    }
    return worst;
}

std::string to_dot(const DiGraph& g) {
    std::ostringstream os;
    os << "digraph G {\n";
    for (int v = 0; v < g.n; ++v) os << "  " << (v + 1) << ";\n";
    for (int v = 0; v < g.n; ++v)
        for (int w : g.adj[v]) os << "  " << (v + 1) << " -> " << (w + 1) << ";\n";
    os << "}\n";
    return os.str();
}

std::string condensation_to_dot(const SccDecomposition& d) {
    std::ostringstream os;
    os << "digraph condensation {\n";
    for (std::size_t c = 0; c < d.components.size(); ++c) {
        os << "  s" << c << " [label=\"{";
        for (std::size_t k = 0; k < d.components[c].size(); ++k) {
            if (k) os << ",";
            os << d.components[c][k] + 1;
        }
        os << "}\"";
        if (std::find(d.sinks.begin(), d.sinks.end(), static_cast<int>(c)) != d.sinks.end())
            os << " shape=doublecircle";
        os << "];\n";
    }
    for (int v = 0; v < d.condensation.n; ++v)
        for (int w : d.condensation.adj[v]) os << "  s" << v << " -> s" << w << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace avglearn

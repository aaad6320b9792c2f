#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "treemst/metric.hpp"

namespace treemst {

struct UndirectedEdge {
    NodeId a;
    NodeId b;

    UndirectedEdge(NodeId x, NodeId y) : a(x < y ? x : y), b(x < y ? y : x) {
        if (x == y) throw std::invalid_argument("UndirectedEdge: self-loop");
    }
    friend bool operator<(const UndirectedEdge& x, const UndirectedEdge& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    }
    friend bool operator==(const UndirectedEdge& x, const UndirectedEdge& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const UndirectedEdge& x, const UndirectedEdge& y) { return !(x == y); }
};

using EdgeSet = std::set<UndirectedEdge>;

inline Rational edge_set_weight(const TreeMetric& m, const EdgeSet& edges) {
    Rational total(0);
    for (const auto& e : edges) total += m.distance(e.a, e.b);
    return total;
}

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), components_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[a] = b;
        --components_;
        return true;
    }
    std::size_t components() const { return components_; }

private:
    std::vector<std::size_t> parent_;
    std::size_t components_;
};

}  // namespace detail

/// MST of the complete graph on `nodes` under the metric. Distinct distances
/// make the result unique, so plain Kruskal over the metric's presorted pair
/// list is canonical.
inline EdgeSet mst_complete(const TreeMetric& m, const std::vector<NodeId>& nodes) {
    std::vector<char> member(m.size(), 0);
    std::size_t count = 0;
    for (NodeId v : nodes) {
        std::size_t i = m.dense_index(v);
        if (!member[i]) {
            member[i] = 1;
            ++count;
        }
    }
    EdgeSet result;
    if (count <= 1) return result;
    detail::UnionFind uf(m.size());
    for (const auto& [a, b] : m.pairs_by_distance()) {
        if (!member[m.dense_index(a)] || !member[m.dense_index(b)]) continue;
        if (uf.unite(m.dense_index(a), m.dense_index(b))) {
            result.insert(UndirectedEdge(a, b));
            if (result.size() == count - 1) break;
        }
    }
    return result;
}

inline EdgeSet mst_complete(const TreeMetric& m) { return mst_complete(m, m.node_ids()); }

/// MST restricted to the given candidate edges, spanning ALL overlay nodes of
/// the metric. Disconnected inputs yield nullopt — a first-class result (the
/// potential maps it to infinity), not an error.
inline std::optional<EdgeSet> mst_subgraph(const TreeMetric& m, const EdgeSet& edges) {
    std::vector<UndirectedEdge> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end(), [&m](const UndirectedEdge& x, const UndirectedEdge& y) {
        return m.distance(x.a, x.b) < m.distance(y.a, y.b);
    });
    detail::UnionFind uf(m.size());
    EdgeSet result;
    for (const auto& e : sorted)
        if (uf.unite(m.dense_index(e.a), m.dense_index(e.b))) result.insert(e);
    if (uf.components() != 1) return std::nullopt;
    return result;
}

struct MsfComponent {
    std::vector<NodeId> nodes;  // sorted
    EdgeSet mst;                // MST over the component's complete metric closure
};

/// Connected components of (V, edges) — isolated nodes included — each paired
/// with the MST over that component's node set under the full metric (not
/// merely the edges that happen to be present).
inline std::vector<MsfComponent> msf_components(const TreeMetric& m, const EdgeSet& edges) {
    detail::UnionFind uf(m.size());
    for (const auto& e : edges) uf.unite(m.dense_index(e.a), m.dense_index(e.b));
    std::map<std::size_t, std::vector<NodeId>> groups;
    for (NodeId v : m.node_ids()) groups[uf.find(m.dense_index(v))].push_back(v);
    std::vector<MsfComponent> result;
    result.reserve(groups.size());
    for (auto& [root, members] : groups) {
        MsfComponent comp;
        comp.nodes = std::move(members);
        comp.mst = mst_complete(m, comp.nodes);
        result.push_back(std::move(comp));
    }
    std::sort(result.begin(), result.end(),
              [](const MsfComponent& x, const MsfComponent& y) { return x.nodes.front() < y.nodes.front(); });
    return result;
}

struct VerifyFailure {
    std::vector<NodeId> nodes;
    std::vector<Rational> distances;
    std::string detail;
};

struct VerifyReport {
    std::string check;
    std::size_t checked = 0;
    std::vector<VerifyFailure> failures;

    bool passed() const { return failures.empty(); }

    std::string to_string() const {
        std::string out = "check=" + check + " checked=" + std::to_string(checked) +
                          " failures=" + std::to_string(failures.size()) + "\n";
        std::size_t shown = 0;
        for (const auto& f : failures) {
            out += "  fail nodes=(";
            for (std::size_t i = 0; i < f.nodes.size(); ++i) out += (i ? "," : "") + std::to_string(f.nodes[i]);
            out += ") distances=(";
            for (std::size_t i = 0; i < f.distances.size(); ++i) out += (i ? "," : "") + f.distances[i].to_string();
            out += ") " + f.detail + "\n";
            if (++shown >= 8) {
                out += "  ... (" + std::to_string(failures.size() - shown) + " more)\n";
                break;
            }
        }
        return out;
    }
};

/// Brute-force check that the relative-witness predicate characterizes MST
/// membership over the complete metric graph:
///   (a) an MST edge {v,w} admits no witness u with u ≺ (v,w);
///   (b) a non-MST pair {v,w} admits a witness u ≺ (v,w) that is itself
///       MST-adjacent to v (checked for both orientations of the pair).
inline VerifyReport verify_relative_neighbor_mst_equivalence(const TreeMetric& m) {
    VerifyReport report;
    report.check = "relative-neighbor-mst-equivalence";
    const auto& ids = m.node_ids();
    EdgeSet mst = mst_complete(m);
    for (NodeId v : ids)
        for (NodeId w : ids) {
            if (v == w) continue;
            ++report.checked;
            bool in_mst = mst.count(UndirectedEdge(v, w)) != 0;
            if (in_mst) {
                for (NodeId u : ids) {
                    if (u == v || u == w) continue;
                    if (is_relative_witness(m, u, v, w)) {
                        report.failures.push_back({{u, v, w},
                                                   {m.distance(u, v), m.distance(u, w), m.distance(v, w)},
                                                   "witness exists for an MST edge"});
                        break;
                    }
                }
            } else {
                bool found = false;
                for (NodeId u : ids) {
                    if (u == v || u == w) continue;
                    if (is_relative_witness(m, u, v, w) && mst.count(UndirectedEdge(v, u))) {
                        found = true;
                        break;
                    }
                }
                if (!found)
                    report.failures.push_back({{v, w},
                                               {m.distance(v, w)},
                                               "non-MST pair has no MST-adjacent witness"});
            }
            if (report.failures.size() >= 64) return report;
        }
    return report;
}

namespace detail {

/// Unique path between two nodes inside a tree-shaped EdgeSet (DFS).
inline std::vector<NodeId> tree_path(const EdgeSet& tree, NodeId from, NodeId to) {
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const auto& e : tree) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<NodeId> stack{from};
    std::map<NodeId, NodeId> prev;
    prev[from] = from;
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        if (cur == to) break;
        for (NodeId next : adj[cur])
            if (!prev.count(next)) {
                prev[next] = cur;
                stack.push_back(next);
            }
    }
    if (!prev.count(to)) return {};
    std::vector<NodeId> path;
    for (NodeId cur = to;; cur = prev[cur]) {
        path.push_back(cur);
        if (cur == from) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace detail

/// Walking the MST path away from v, every hop strictly increases the metric
/// distance back to v. This is what lets a reference greedily "route" toward
/// its place in the tree.
inline VerifyReport verify_mst_path_monotonicity(const TreeMetric& m) {
    VerifyReport report;
    report.check = "mst-path-monotonicity";
    const auto& ids = m.node_ids();
    EdgeSet mst = mst_complete(m);
    for (NodeId v : ids)
        for (NodeId w : ids) {
            if (v == w) continue;
            std::vector<NodeId> path = detail::tree_path(mst, v, w);
            if (path.empty()) {
                report.failures.push_back({{v, w}, {}, "no MST path found"});
                continue;
            }
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                ++report.checked;
                Rational here = path[i] == v ? Rational(0) : m.distance(path[i], v);
                Rational next = m.distance(path[i + 1], v);
                if (!(here < next)) {
                    report.failures.push_back({{v, w, path[i], path[i + 1]},
                                               {here, next},
                                               "distance to origin failed to increase along MST path"});
                    if (report.failures.size() >= 64) return report;
                }
            }
        }
    return report;
}

}  // namespace treemst

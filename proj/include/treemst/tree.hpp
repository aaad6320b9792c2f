#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "treemst/rational.hpp"
#include "treemst/rng.hpp"

namespace treemst {

using NodeId = std::uint32_t;

struct TreeEdge {
    NodeId a = 0;
    NodeId b = 0;
    Rational weight;
};

/// The weighted underlay tree. Overlay nodes are a subset of the tree's nodes;
/// only they take part in the protocol, internal nodes exist purely to shape
/// the metric. Immutable once constructed and safe to share between runs.
///
/// Construction validates everything the rest of the system relies on:
/// connectivity, positive weights, and pairwise-distinct overlay distances
/// (strict comparisons would otherwise be ambiguous).
class WeightedTree {
public:
    WeightedTree(std::vector<NodeId> nodes, std::vector<TreeEdge> edges, std::vector<NodeId> overlay) {
        normalize_inputs(std::move(nodes), std::move(edges), std::move(overlay));
        validate_structure();
        build_paths();
        validate_distinct_overlay_distances();
    }

    const std::vector<NodeId>& tree_nodes() const { return nodes_; }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    const std::vector<NodeId>& overlay_nodes() const { return overlay_; }

    bool has_node(NodeId id) const { return index_.count(id) != 0; }

    /// Weighted length of the unique path between any two tree nodes. Exact.
    Rational path_distance(NodeId a, NodeId b) const {
        std::size_t ia = index_of(a);
        std::size_t ib = index_of(b);
        std::size_t anc = lowest_common_ancestor(ia, ib);
        return dist_to_root_[ia] + dist_to_root_[ib] - dist_to_root_[anc] - dist_to_root_[anc];
    }

    /// The unique node lying on all three pairwise paths between u, v and r.
    NodeId median(NodeId u, NodeId v, NodeId r) const {
        std::size_t ab = lowest_common_ancestor(index_of(u), index_of(v));
        std::size_t ar = lowest_common_ancestor(index_of(u), index_of(r));
        std::size_t br = lowest_common_ancestor(index_of(v), index_of(r));
        std::size_t best = ab;
        if (depth_[ar] > depth_[best]) best = ar;
        if (depth_[br] > depth_[best]) best = br;
        return nodes_[best];
    }

    friend bool operator==(const WeightedTree& x, const WeightedTree& y) {
        if (x.nodes_ != y.nodes_ || x.overlay_ != y.overlay_ || x.edges_.size() != y.edges_.size()) return false;
        for (std::size_t i = 0; i < x.edges_.size(); ++i) {
            if (x.edges_[i].a != y.edges_[i].a || x.edges_[i].b != y.edges_[i].b ||
                x.edges_[i].weight != y.edges_[i].weight)
                return false;
        }
        return true;
    }

private:
    std::size_t index_of(NodeId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw std::invalid_argument("WeightedTree: unknown node id " + std::to_string(id));
        return it->second;
    }

    std::size_t lowest_common_ancestor(std::size_t a, std::size_t b) const {
        while (depth_[a] > depth_[b]) a = parent_[a];
        while (depth_[b] > depth_[a]) b = parent_[b];
        while (a != b) {
            a = parent_[a];
            b = parent_[b];
        }
        return a;
    }

    void normalize_inputs(std::vector<NodeId> nodes, std::vector<TreeEdge> edges, std::vector<NodeId> overlay) {
        nodes_ = std::move(nodes);
        std::sort(nodes_.begin(), nodes_.end());
        if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end())
            throw std::invalid_argument("WeightedTree: duplicate node id");
        edges_ = std::move(edges);
        for (auto& e : edges_) {
            if (e.a == e.b) throw std::invalid_argument("WeightedTree: self-loop edge");
            if (e.a > e.b) std::swap(e.a, e.b);
        }
        std::sort(edges_.begin(), edges_.end(),
                  [](const TreeEdge& x, const TreeEdge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
        overlay_ = std::move(overlay);
        std::sort(overlay_.begin(), overlay_.end());
        if (std::adjacent_find(overlay_.begin(), overlay_.end()) != overlay_.end())
            throw std::invalid_argument("WeightedTree: duplicate overlay id");
    }

    void validate_structure() {
        if (nodes_.empty()) throw std::invalid_argument("WeightedTree: empty node set");
        for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = i;
        if (edges_.size() != nodes_.size() - 1)
            throw std::invalid_argument("WeightedTree: edge count must be node count - 1");
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i - 1].a == edges_[i].a && edges_[i - 1].b == edges_[i].b)
                throw std::invalid_argument("WeightedTree: duplicate edge");
        std::vector<std::size_t> uf(nodes_.size());
        for (std::size_t i = 0; i < uf.size(); ++i) uf[i] = i;
        auto root = [&](std::size_t x) {
            while (uf[x] != x) x = uf[x] = uf[uf[x]];
            return x;
        };
        for (const auto& e : edges_) {
            if (!(e.weight > Rational(0))) throw std::invalid_argument("WeightedTree: non-positive edge weight");
            std::size_t ra = root(index_of(e.a));
            std::size_t rb = root(index_of(e.b));
            if (ra == rb) throw std::invalid_argument("WeightedTree: edge set contains a cycle");
            uf[ra] = rb;
        }
        // |E| = |V|-1 and acyclic together imply connectivity; keep the direct check anyway.
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (root(i) != root(0)) throw std::invalid_argument("WeightedTree: edge set is disconnected");
        for (NodeId v : overlay_)
            if (!has_node(v)) throw std::invalid_argument("WeightedTree: overlay node not in tree");
    }

    void build_paths() {
        const std::size_t n = nodes_.size();
        std::vector<std::vector<std::pair<std::size_t, Rational>>> adj(n);
        for (const auto& e : edges_) {
            std::size_t ia = index_of(e.a);
            std::size_t ib = index_of(e.b);
            adj[ia].emplace_back(ib, e.weight);
            adj[ib].emplace_back(ia, e.weight);
        }
        parent_.assign(n, 0);
        depth_.assign(n, 0);
        dist_to_root_.assign(n, Rational(0));
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            for (const auto& [next, w] : adj[cur]) {
                if (seen[next]) continue;
                seen[next] = 1;
                parent_[next] = cur;
                depth_[next] = depth_[cur] + 1;
                dist_to_root_[next] = dist_to_root_[cur] + w;
                stack.push_back(next);
            }
        }
    }

    void validate_distinct_overlay_distances() const {
        std::vector<Rational> all;
        all.reserve(overlay_.size() * (overlay_.size() + 1) / 2);
        for (std::size_t i = 0; i < overlay_.size(); ++i)
            for (std::size_t j = i + 1; j < overlay_.size(); ++j)
                all.push_back(path_distance(overlay_[i], overlay_[j]));
        std::sort(all.begin(), all.end());
        auto dup = std::adjacent_find(all.begin(), all.end());
        if (dup != all.end())
            throw std::invalid_argument("WeightedTree: overlay distances are not pairwise distinct (value " +
                                        dup->to_string() + " repeats)");
    }

    std::vector<NodeId> nodes_;
    std::vector<TreeEdge> edges_;
    std::vector<NodeId> overlay_;
    std::map<NodeId, std::size_t> index_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> depth_;
    std::vector<Rational> dist_to_root_;
};

/// Canonical text form, one record per line:
///   tree <|V_T|> <|V|>
///   edge <a> <b> <weight>     (a < b, sorted)
///   overlay <id>              (sorted)
/// Writing then loading reproduces the tree exactly, and re-writing a loaded
/// canonical file is byte-identical to it.
inline std::string format_tree(const WeightedTree& t) {
    std::string out;
    out += "tree " + std::to_string(t.tree_nodes().size()) + " " + std::to_string(t.overlay_nodes().size()) + "\n";
    for (const auto& e : t.edges())
        out += "edge " + std::to_string(e.a) + " " + std::to_string(e.b) + " " + e.weight.to_string() + "\n";
    for (NodeId v : t.overlay_nodes()) out += "overlay " + std::to_string(v) + "\n";
    return out;
}

inline WeightedTree parse_tree(std::istream& in) {
    std::string line;
    std::size_t declared_nodes = 0;
    std::size_t declared_overlay = 0;
    bool header_seen = false;
    std::vector<TreeEdge> edges;
    std::vector<NodeId> overlay;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("tree file line " + std::to_string(line_no) + ": " + what);
        };
        if (kind == "tree") {
            if (header_seen) fail("duplicate header");
            if (!(ls >> declared_nodes >> declared_overlay)) fail("malformed header");
            header_seen = true;
        } else if (kind == "edge") {
            NodeId a = 0;
            NodeId b = 0;
            std::string w;
            if (!(ls >> a >> b >> w)) fail("malformed edge");
            edges.push_back(TreeEdge{a, b, Rational::parse(w)});
        } else if (kind == "overlay") {
            NodeId v = 0;
            if (!(ls >> v)) fail("malformed overlay line");
            overlay.push_back(v);
        } else {
            fail("unknown record '" + kind + "'");
        }
    }
    if (!header_seen) throw std::invalid_argument("tree file: missing header");
    std::vector<NodeId> nodes;
    for (const auto& e : edges) {
        nodes.push_back(e.a);
        nodes.push_back(e.b);
    }
    nodes.insert(nodes.end(), overlay.begin(), overlay.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() != declared_nodes)
        throw std::invalid_argument("tree file: header declares " + std::to_string(declared_nodes) +
                                    " nodes but records name " + std::to_string(nodes.size()));
    if (overlay.size() != declared_overlay)
        throw std::invalid_argument("tree file: header declares " + std::to_string(declared_overlay) +
                                    " overlay nodes but file lists " + std::to_string(overlay.size()));
    return WeightedTree(std::move(nodes), std::move(edges), std::move(overlay));
}

inline WeightedTree load_tree_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tree file: " + path);
    return parse_tree(in);
}

inline void save_tree_file(const WeightedTree& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tree file: " + path);
    out << format_tree(t);
}

/// Thrown when the generator cannot reach pairwise-distinct overlay distances
/// within its retry budget (e.g. a degenerate weight range).
class TreeGenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic random tree: ids 0..n_overlay+n_internal-1, random attachment
/// topology, integer weights from [weight_lo, weight_hi]. Weights are re-rolled
/// (topology kept) until overlay distances are pairwise distinct, up to a fixed
/// retry budget.
inline WeightedTree generate_random_tree(std::size_t n_overlay, std::size_t n_internal,
                                         std::int64_t weight_lo, std::int64_t weight_hi,
                                         std::uint64_t seed, std::size_t* retries_used = nullptr) {
    if (n_overlay < 1) throw std::invalid_argument("generate_random_tree: need at least one overlay node");
    if (weight_lo <= 0 || weight_hi < weight_lo)
        throw std::invalid_argument("generate_random_tree: weight range must satisfy 0 < lo <= hi");
    const std::size_t total = n_overlay + n_internal;
    SimRng rng = seeded_rng(seed);

    std::vector<NodeId> nodes(total);
    for (std::size_t i = 0; i < total; ++i) nodes[i] = static_cast<NodeId>(i);

    std::vector<std::pair<NodeId, NodeId>> topology;
    topology.reserve(total > 0 ? total - 1 : 0);
    for (std::size_t k = 1; k < total; ++k)
        topology.emplace_back(static_cast<NodeId>(uniform_below(rng, k)), static_cast<NodeId>(k));

    std::vector<NodeId> pool = nodes;
    shuffle_in_place(pool, rng);
    std::vector<NodeId> overlay(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_overlay));
    std::sort(overlay.begin(), overlay.end());

    constexpr std::size_t kMaxRetries = 64;
    for (std::size_t attempt = 0; attempt <= kMaxRetries; ++attempt) {
        std::vector<TreeEdge> edges;
        edges.reserve(topology.size());
        for (const auto& [a, b] : topology)
            edges.push_back(TreeEdge{a, b, Rational(uniform_int(rng, weight_lo, weight_hi))});
        try {
            WeightedTree t(nodes, std::move(edges), overlay);
            if (retries_used) *retries_used = attempt;
            return t;
        } catch (const std::invalid_argument&) {
            // distance collision: re-roll weights
        }
    }
    throw TreeGenerationError("generate_random_tree: could not reach distinct overlay distances after " +
                              std::to_string(kMaxRetries) + " weight re-rolls (seed " + std::to_string(seed) +
                              ", range [" + std::to_string(weight_lo) + "," + std::to_string(weight_hi) + "])");
}

}  // namespace treemst

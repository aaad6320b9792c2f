#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "treemst/rational.hpp"
#include "treemst/tree.hpp"

namespace treemst {

/// Dense all-pairs distance table over the overlay nodes, plus the orderings
/// the MST machinery wants. Built once per tree; nodes keep only views into it.
class TreeMetric {
public:
    explicit TreeMetric(const WeightedTree& tree) : tree_(&tree), ids_(tree.overlay_nodes()) {
        const std::size_t n = ids_.size();
        for (std::size_t i = 0; i < n; ++i) dense_[ids_[i]] = i;
        table_.assign(n * n, Rational(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Rational d = tree.path_distance(ids_[i], ids_[j]);
                table_[i * n + j] = d;
                table_[j * n + i] = d;
            }
        pairs_.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs_.emplace_back(ids_[i], ids_[j]);
        std::sort(pairs_.begin(), pairs_.end(),
                  [this](const auto& x, const auto& y) { return distance(x.first, x.second) < distance(y.first, y.second); });
    }

    const std::vector<NodeId>& node_ids() const { return ids_; }
    std::size_t size() const { return ids_.size(); }
    const WeightedTree& tree() const { return *tree_; }

    bool has_node(NodeId v) const { return dense_.count(v) != 0; }

    std::size_t dense_index(NodeId v) const {
        auto it = dense_.find(v);
        if (it == dense_.end()) throw std::invalid_argument("TreeMetric: unknown overlay node " + std::to_string(v));
        return it->second;
    }

    const Rational& distance(NodeId a, NodeId b) const {
        return table_[dense_index(a) * ids_.size() + dense_index(b)];
    }

    /// All unordered overlay pairs, ascending by distance. Distinctness is
    /// guaranteed by the tree, so this order is total and unambiguous.
    const std::vector<std::pair<NodeId, NodeId>>& pairs_by_distance() const { return pairs_; }

private:
    const WeightedTree* tree_;
    std::vector<NodeId> ids_;
    std::map<NodeId, std::size_t> dense_;
    std::vector<Rational> table_;
    std::vector<std::pair<NodeId, NodeId>> pairs_;
};

/// u is a relative witness for the pair (v, w) iff it is strictly closer to
/// both endpoints than they are to each other.
inline bool is_relative_witness(const TreeMetric& m, NodeId u, NodeId v, NodeId w) {
    if (u == v || u == w) return false;
    const Rational& dvw = m.distance(v, w);
    return m.distance(u, v) < dvw && m.distance(u, w) < dvw;
}

struct WitnessCheckFailure {
    NodeId u = 0, v = 0, w = 0, r = 0;
    std::string detail;
};

struct WitnessCheckReport {
    std::size_t cases_checked = 0;
    std::vector<WitnessCheckFailure> failures;
    bool passed() const { return failures.empty(); }
};

/// Exhaustive check of the key geometric fact about tree metrics: whenever two
/// nodes u and v are both strictly closer to some anchor r than a third node w
/// is, then one of them witnesses the other's pair with w — u ≺ (v,w) or
/// v ≺ (u,w) — and in particular w never witnesses (u,v). Quadratic in pairs,
/// so intended for |V| up to a dozen or so.
inline WitnessCheckReport verify_witness_disjunction(const TreeMetric& m) {
    WitnessCheckReport report;
    const auto& ids = m.node_ids();
    for (NodeId u : ids)
        for (NodeId v : ids) {
            if (v == u) continue;
            for (NodeId w : ids) {
                if (w == u || w == v) continue;
                for (NodeId r : ids) {
                    if (!(m.distance(u, r) < m.distance(w, r))) continue;
                    if (!(m.distance(v, r) < m.distance(w, r))) continue;
                    ++report.cases_checked;
                    bool covered = is_relative_witness(m, u, v, w) || is_relative_witness(m, v, u, w);
                    bool excluded = !is_relative_witness(m, w, u, v);
                    if (!covered || !excluded) {
                        report.failures.push_back({u, v, w, r,
                                                   !covered ? "neither candidate is a relative witness"
                                                            : "excluded candidate witnesses the remaining pair"});
                        if (report.failures.size() >= 16) return report;
                    }
                }
            }
        }
    return report;
}

}  // namespace treemst

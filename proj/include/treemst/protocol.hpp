#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "treemst/metric.hpp"
#include "treemst/rng.hpp"

namespace treemst {

/// A node's entire local state: its id and the reference set it holds.
/// Self-references are dropped on construction and on merge.
struct NodeState {
    NodeId id = 0;
    std::set<NodeId> neighbors;

    NodeState() = default;
    NodeState(NodeId self, std::set<NodeId> refs) : id(self), neighbors(std::move(refs)) { neighbors.erase(id); }

    friend bool operator==(const NodeState& x, const NodeState& y) {
        return x.id == y.id && x.neighbors == y.neighbors;
    }
};

enum class MessageKind { Introduction, Delegation };

struct OutMessage {
    NodeId to = 0;
    NodeId payload = 0;
    MessageKind kind = MessageKind::Introduction;

    friend bool operator==(const OutMessage& x, const OutMessage& y) {
        return x.to == y.to && x.payload == y.payload && x.kind == y.kind;
    }
};

/// Merge a delivered batch into the reference set. Duplicates collapse,
/// self-references vanish.
inline NodeState merge_delivered(const NodeState& state, const std::vector<NodeId>& delivered) {
    NodeState next = state;
    for (NodeId ref : delivered) next.neighbors.insert(ref);
    next.neighbors.erase(next.id);
    return next;
}

enum class OrderPolicy { IdAscending, DistanceAscending, SeededRandom };

/// Snapshot iteration order for one activation. The seed only matters for
/// SeededRandom; the kernel derives a fresh one per activation so repeated
/// activations of the same node do not replay one permutation forever.
struct ActivationOrder {
    OrderPolicy policy = OrderPolicy::IdAscending;
    std::uint64_t seed = 0;
};

/// Metric access restricted to the ids a node legitimately knows: its own and
/// those it holds references to. Looking up anything else is a protocol bug,
/// not a data error, hence logic_error — and the check is always on.
class LocalMetricView {
public:
    LocalMetricView(const TreeMetric& m, NodeId self, const std::set<NodeId>& known) : m_(&m), self_(self), known_(&known) {}

    const Rational& distance(NodeId a, NodeId b) const {
        check(a);
        check(b);
        return m_->distance(a, b);
    }

private:
    void check(NodeId v) const {
        if (v != self_ && known_->count(v) == 0)
            throw std::logic_error("protocol queried distance for unreferenced node " + std::to_string(v));
    }

    const TreeMetric* m_;
    NodeId self_;
    const std::set<NodeId>* known_;
};

struct ActivationResult {
    NodeState state;
    std::vector<OutMessage> messages;
};

/// One activation of node v: walk a snapshot of the reference set; a neighbor
/// w for which some still-held u is strictly closer to both v and w gets
/// delegated to the closest such u (to w) and forgotten; every other neighbor
/// receives an introduction carrying v's own reference. Every reference v
/// held at the start is thus either forwarded exactly once or retained —
/// nothing is destroyed, so connectivity can only be rewired, never lost.
inline ActivationResult activate(const NodeState& state, const TreeMetric& m, const ActivationOrder& order = {}) {
    std::vector<NodeId> snapshot(state.neighbors.begin(), state.neighbors.end());
    LocalMetricView view(m, state.id, state.neighbors);
    switch (order.policy) {
        case OrderPolicy::IdAscending:
            break;  // set iteration is already ascending
        case OrderPolicy::DistanceAscending:
            std::sort(snapshot.begin(), snapshot.end(), [&](NodeId x, NodeId y) {
                return view.distance(state.id, x) < view.distance(state.id, y);
            });
            break;
        case OrderPolicy::SeededRandom: {
            SimRng rng = seeded_rng(order.seed);
            shuffle_in_place(snapshot, rng);
            break;
        }
    }

    ActivationResult result;
    result.state = state;
    std::set<NodeId>& live = result.state.neighbors;
    for (NodeId w : snapshot) {
        // Witness search over the LIVE set: references already delegated away
        // this activation are gone from local memory and cannot vouch.
        NodeId best_u = 0;
        bool have_u = false;
        const Rational& dvw = view.distance(state.id, w);
        for (NodeId u : live) {
            if (u == w) continue;
            if (view.distance(u, state.id) < dvw && view.distance(u, w) < dvw) {
                if (!have_u || view.distance(u, w) < view.distance(best_u, w)) {
                    best_u = u;
                    have_u = true;
                }
            }
        }
        if (have_u) {
            result.messages.push_back(OutMessage{best_u, w, MessageKind::Delegation});
            live.erase(w);
        } else {
            result.messages.push_back(OutMessage{w, state.id, MessageKind::Introduction});
        }
    }
    return result;
}

}  // namespace treemst

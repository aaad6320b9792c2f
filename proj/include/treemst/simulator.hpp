#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "treemst/mst.hpp"
#include "treemst/protocol.hpp"

namespace treemst {

/// One pending reference in a node's channel. arrival_step is the step_index
/// of the configuration the message first appeared in; schedulers use it to
/// age messages, and it gives each entry an identity inside the multiset.
struct ChannelEntry {
    NodeId payload = 0;
    std::uint64_t arrival_step = 0;

    friend bool operator==(const ChannelEntry& x, const ChannelEntry& y) {
        return x.payload == y.payload && x.arrival_step == y.arrival_step;
    }
};

/// A full system configuration: every node's state plus every channel.
/// Channels are unbounded multisets — duplicates are preserved until merge.
struct Configuration {
    std::map<NodeId, NodeState> states;
    std::map<NodeId, std::vector<ChannelEntry>> channels;
    std::uint64_t step_index = 0;
};

inline void validate_configuration(const Configuration& c, const TreeMetric& m) {
    if (c.states.size() != m.size())
        throw std::invalid_argument("configuration: state map must cover every overlay node");
    for (const auto& [id, state] : c.states) {
        if (!m.has_node(id)) throw std::invalid_argument("configuration: unknown node " + std::to_string(id));
        if (state.id != id) throw std::invalid_argument("configuration: state map key mismatch");
        for (NodeId w : state.neighbors)
            if (!m.has_node(w) || w == id)
                throw std::invalid_argument("configuration: bad reference " + std::to_string(w) + " held by " +
                                            std::to_string(id));
    }
    for (const auto& [id, entries] : c.channels) {
        if (!m.has_node(id)) throw std::invalid_argument("configuration: channel for unknown node " + std::to_string(id));
        for (const auto& e : entries)
            if (!m.has_node(e.payload) || e.payload == id)
                throw std::invalid_argument("configuration: bad pending reference " + std::to_string(e.payload) +
                                            " for " + std::to_string(id));
    }
}

/// (v,w) is explicit iff v currently holds w's reference.
inline std::set<std::pair<NodeId, NodeId>> explicit_edges(const Configuration& c) {
    std::set<std::pair<NodeId, NodeId>> out;
    for (const auto& [id, state] : c.states)
        for (NodeId w : state.neighbors) out.emplace(id, w);
    return out;
}

/// (v,w) is implicit iff a reference to w sits in v's channel; the value is
/// the multiplicity.
inline std::map<std::pair<NodeId, NodeId>, std::size_t> implicit_edges(const Configuration& c) {
    std::map<std::pair<NodeId, NodeId>, std::size_t> out;
    for (const auto& [id, entries] : c.channels)
        for (const auto& e : entries) ++out[{id, e.payload}];
    return out;
}

/// The undirected edge set every structural notion (components, potentials,
/// legality) is defined over: explicit and implicit edges, direction and
/// multiplicity forgotten.
inline EdgeSet undirected_projection(const Configuration& c) {
    EdgeSet out;
    for (const auto& [id, state] : c.states)
        for (NodeId w : state.neighbors) out.insert(UndirectedEdge(id, w));
    for (const auto& [id, entries] : c.channels)
        for (const auto& e : entries) out.insert(UndirectedEdge(id, e.payload));
    return out;
}

struct ExtendedRational {
    bool infinite = false;
    Rational value;  // meaningful only when finite

    static ExtendedRational infinity() { return {true, Rational(0)}; }
    static ExtendedRational finite(Rational v) { return {false, std::move(v)}; }

    friend bool operator==(const ExtendedRational& x, const ExtendedRational& y) {
        return x.infinite == y.infinite && (x.infinite || x.value == y.value);
    }
    friend bool operator<=(const ExtendedRational& x, const ExtendedRational& y) {
        if (y.infinite) return true;
        if (x.infinite) return false;
        return x.value <= y.value;
    }
    std::string to_string() const { return infinite ? "inf" : value.to_string(); }
};

/// Weight of the MST over the currently present (undirected) edges; infinity
/// while those edges do not connect all overlay nodes. Never increases under
/// the protocol.
inline ExtendedRational potential_phi(const Configuration& c, const TreeMetric& m) {
    auto sub = mst_subgraph(m, undirected_projection(c));
    if (!sub) return ExtendedRational::infinity();
    return ExtendedRational::finite(edge_set_weight(m, *sub));
}

/// Weight of the longest present edge that does not belong to the true MST;
/// zero once only MST edges remain. Drives the cleanup phase once the graph
/// contains all valid edges.
inline Rational potential_phi_tilde(const Configuration& c, const TreeMetric& m) {
    EdgeSet mst = mst_complete(m);
    Rational best(0);
    for (const auto& e : undirected_projection(c))
        if (!mst.count(e)) {
            Rational d = m.distance(e.a, e.b);
            if (best < d) best = d;
        }
    return best;
}

/// Legality: within every connected component of the projected graph, the
/// undirected projection of the EXPLICIT edges equals that component's MST
/// over the full metric, and every pending reference also projects onto a
/// component-MST edge. One explicit direction suffices.
inline bool is_legal(const Configuration& c, const TreeMetric& m) {
    auto components = msf_components(m, undirected_projection(c));
    EdgeSet target;
    for (const auto& comp : components) target.insert(comp.mst.begin(), comp.mst.end());
    EdgeSet explicit_undirected;
    for (const auto& [id, state] : c.states)
        for (NodeId w : state.neighbors) explicit_undirected.insert(UndirectedEdge(id, w));
    if (explicit_undirected != target) return false;
    for (const auto& [id, entries] : c.channels)
        for (const auto& e : entries)
            if (!target.count(UndirectedEdge(id, e.payload))) return false;
    return true;
}

/// Convergence as the omniscient observer declares it: legal, and every
/// pending message is a reference the receiver already holds explicitly or a
/// component-MST reference — so no future delivery or activation can change
/// the undirected explicit edge set.
inline bool is_converged(const Configuration& c, const TreeMetric& m) {
    if (!is_legal(c, m)) return false;
    auto components = msf_components(m, undirected_projection(c));
    EdgeSet target;
    for (const auto& comp : components) target.insert(comp.mst.begin(), comp.mst.end());
    for (const auto& [id, entries] : c.channels) {
        auto state = c.states.find(id);
        for (const auto& e : entries) {
            bool held = state != c.states.end() && state->second.neighbors.count(e.payload) != 0;
            if (!held && !target.count(UndirectedEdge(id, e.payload))) return false;
        }
    }
    return true;
}

/// One activation with a chosen delivery subset.
struct ScheduleEvent {
    NodeId node = 0;
    std::vector<ChannelEntry> delivered;
};

/// Apply one event in place; returns the messages the activated node sent.
/// Delivered entries must actually be present (multiset inclusion) — a
/// mismatch is a kernel bug, not an input error.
inline std::vector<OutMessage> apply_event(Configuration& c, const ScheduleEvent& e, const TreeMetric& m,
                                           const ActivationOrder& order = {}) {
    auto state_it = c.states.find(e.node);
    if (state_it == c.states.end())
        throw std::logic_error("apply_event: unknown node " + std::to_string(e.node));
    auto& channel = c.channels[e.node];
    std::vector<NodeId> payloads;
    payloads.reserve(e.delivered.size());
    for (const auto& want : e.delivered) {
        auto found = std::find(channel.begin(), channel.end(), want);
        if (found == channel.end())
            throw std::logic_error("apply_event: delivering message not present in channel of node " +
                                   std::to_string(e.node));
        payloads.push_back(want.payload);
        channel.erase(found);
    }
    ActivationResult act = activate(merge_delivered(state_it->second, payloads), m, order);
    state_it->second = std::move(act.state);
    ++c.step_index;
    for (const auto& msg : act.messages) c.channels[msg.to].push_back(ChannelEntry{msg.payload, c.step_index});
    return act.messages;
}

struct StepResult {
    Configuration config;
    std::vector<OutMessage> sent;
};

/// Pure variant of apply_event for callers that want configurations as values.
inline StepResult step(const Configuration& c, const ScheduleEvent& e, const TreeMetric& m,
                       const ActivationOrder& order = {}) {
    StepResult out;
    out.config = c;
    out.sent = apply_event(out.config, e, m, order);
    return out;
}

enum class InitialShape { Line, Star, RandomConnected, RandomMaybeDisconnected, AdversarialLongEdges };

namespace detail {

/// Place one reference "v knows w", choosing explicitly-held vs in-flight at
/// random — both kinds must occur in generated configurations.
inline void place_reference(Configuration& c, NodeId v, NodeId w, SimRng& rng) {
    if (coin_flip(rng))
        c.states[v].neighbors.insert(w);
    else
        c.channels[v].push_back(ChannelEntry{w, 0});
}

/// Random attachment pattern over the given ids: each node after the first
/// knows (or is known by) an earlier one, plus a few extra random pairs.
inline void wire_random_connected(Configuration& c, const std::vector<NodeId>& ids, SimRng& rng, bool extras) {
    for (std::size_t k = 1; k < ids.size(); ++k) {
        NodeId other = ids[uniform_below(rng, k)];
        if (coin_flip(rng))
            place_reference(c, ids[k], other, rng);
        else
            place_reference(c, other, ids[k], rng);
    }
    if (!extras || ids.size() < 3) return;
    for (std::size_t i = 0; i < ids.size() / 4 + 1; ++i) {
        NodeId a = ids[uniform_below(rng, ids.size())];
        NodeId b = ids[uniform_below(rng, ids.size())];
        if (a != b) place_reference(c, a, b, rng);
    }
}

}  // namespace detail

/// Deterministic starting configurations. Every overlay node gets a state; the
/// shape decides which references exist and the seed decides where each one
/// sits (explicit vs channel) and how nodes are arranged.
inline Configuration generate_initial(const TreeMetric& m, InitialShape shape, std::uint64_t seed) {
    Configuration c;
    for (NodeId v : m.node_ids()) {
        c.states.emplace(v, NodeState(v, {}));
        c.channels[v];  // materialize empty channel
    }
    SimRng rng = seeded_rng(mix_seed(seed, static_cast<std::uint64_t>(shape) + 1));
    std::vector<NodeId> ids = m.node_ids();
    if (ids.size() < 2) return c;

    switch (shape) {
        case InitialShape::Line: {
            shuffle_in_place(ids, rng);
            for (std::size_t k = 1; k < ids.size(); ++k) {
                if (coin_flip(rng))
                    detail::place_reference(c, ids[k - 1], ids[k], rng);
                else
                    detail::place_reference(c, ids[k], ids[k - 1], rng);
            }
            break;
        }
        case InitialShape::Star: {
            NodeId hub = ids[uniform_below(rng, ids.size())];
            for (NodeId v : ids)
                if (v != hub) c.states[hub].neighbors.insert(v);
            break;
        }
        case InitialShape::RandomConnected: {
            shuffle_in_place(ids, rng);
            detail::wire_random_connected(c, ids, rng, true);
            break;
        }
        case InitialShape::RandomMaybeDisconnected: {
            shuffle_in_place(ids, rng);
            std::size_t groups = std::min<std::size_t>(ids.size(), 2 + uniform_below(rng, 2));
            std::vector<std::vector<NodeId>> parts(groups);
            for (std::size_t i = 0; i < ids.size(); ++i)
                parts[i < groups ? i : uniform_below(rng, groups)].push_back(ids[i]);
            for (auto& part : parts) detail::wire_random_connected(c, part, rng, true);
            break;
        }
        case InitialShape::AdversarialLongEdges: {
            // Longest edges that still form a spanning tree: reverse-order
            // Kruskal. Worst-case starting weight for the cleanup phase.
            const auto& pairs = m.pairs_by_distance();
            detail::UnionFind uf(m.size());
            for (auto it = pairs.rbegin(); it != pairs.rend(); ++it)
                if (uf.unite(m.dense_index(it->first), m.dense_index(it->second))) {
                    if (coin_flip(rng))
                        detail::place_reference(c, it->first, it->second, rng);
                    else
                        detail::place_reference(c, it->second, it->first, rng);
                }
            break;
        }
    }
    return c;
}

inline const char* to_string(InitialShape s) {
    switch (s) {
        case InitialShape::Line: return "line";
        case InitialShape::Star: return "star";
        case InitialShape::RandomConnected: return "random";
        case InitialShape::RandomMaybeDisconnected: return "disconnected";
        case InitialShape::AdversarialLongEdges: return "long-edges";
    }
    return "?";
}

inline InitialShape parse_initial_shape(const std::string& s) {
    if (s == "line") return InitialShape::Line;
    if (s == "star") return InitialShape::Star;
    if (s == "random") return InitialShape::RandomConnected;
    if (s == "disconnected") return InitialShape::RandomMaybeDisconnected;
    if (s == "long-edges") return InitialShape::AdversarialLongEdges;
    throw std::invalid_argument("unknown initial shape: " + s);
}

}  // namespace treemst

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "treemst/analysis.hpp"
#include "treemst/simulator.hpp"

using namespace treemst;

namespace {

WeightedTree junction_tree() {
    return WeightedTree({0, 1, 2, 3},
                        {TreeEdge{2, 3, Rational(6)}, TreeEdge{3, 1, Rational(1)}, TreeEdge{3, 0, Rational(5)}},
                        {0, 1, 2});
}

// Test-side MST-over-subgraph oracle, written differently from the library:
// map-based union-find over a freshly sorted edge vector.
std::optional<Rational> naive_mst_weight(const TreeMetric& m, const EdgeSet& edges) {
    std::vector<UndirectedEdge> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end(),
              [&](const UndirectedEdge& x, const UndirectedEdge& y) { return m.distance(x.a, x.b) < m.distance(y.a, y.b); });
    std::map<NodeId, NodeId> parent;
    for (NodeId v : m.node_ids()) parent[v] = v;
    auto root = [&](NodeId v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    Rational total(0);
    std::size_t picked = 0;
    for (const auto& e : sorted) {
        NodeId ra = root(e.a), rb = root(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        total += m.distance(e.a, e.b);
        ++picked;
    }
    if (picked + 1 != m.size()) return std::nullopt;
    return total;
}

Configuration mst_config(const TreeMetric& m) {
    Configuration c;
    for (NodeId v : m.node_ids()) {
        c.states.emplace(v, NodeState(v, {}));
        c.channels[v];
    }
    for (const auto& e : mst_complete(m)) c.states[e.a].neighbors.insert(e.b);
    return c;
}

// A short random trajectory gives configurations mixing explicit refs and
// aged channel entries — better coverage than freshly generated shapes alone.
Configuration churn(const TreeMetric& m, Configuration c, std::uint64_t seed, int steps) {
    SimRng rng = seeded_rng(seed);
    const auto& ids = m.node_ids();
    for (int i = 0; i < steps; ++i) {
        ScheduleEvent e;
        e.node = ids[uniform_below(rng, ids.size())];
        if (coin_flip(rng)) e.delivered = c.channels[e.node];
        apply_event(c, e, m, ActivationOrder{OrderPolicy::SeededRandom, seed + i});
    }
    return c;
}

bool same_config(const Configuration& x, const Configuration& y) {
    return x.states == y.states && x.channels == y.channels && x.step_index == y.step_index;
}

}  // namespace

TEST_CASE("configuration validation", "[simulator]") {
    TreeMetric m(junction_tree());
    Configuration good = mst_config(m);
    CHECK_NOTHROW(validate_configuration(good, m));

    Configuration missing = good;
    missing.states.erase(2);
    CHECK_THROWS_AS(validate_configuration(missing, m), std::invalid_argument);

    Configuration mismatch = good;
    mismatch.states[2] = NodeState(1, {});
    CHECK_THROWS_AS(validate_configuration(mismatch, m), std::invalid_argument);

    Configuration self_ref = good;
    self_ref.states[1].neighbors.insert(1);
    CHECK_THROWS_AS(validate_configuration(self_ref, m), std::invalid_argument);

    Configuration alien = good;
    alien.states[1].neighbors.insert(3);  // underlay-internal, not overlay
    CHECK_THROWS_AS(validate_configuration(alien, m), std::invalid_argument);

    Configuration bad_channel = good;
    bad_channel.channels[1].push_back(ChannelEntry{1, 0});
    CHECK_THROWS_AS(validate_configuration(bad_channel, m), std::invalid_argument);
}

TEST_CASE("edge views of a configuration", "[simulator]") {
    TreeMetric m(junction_tree());
    Configuration c;
    for (NodeId v : m.node_ids()) c.states.emplace(v, NodeState(v, {}));
    c.states[0].neighbors = {1, 2};
    c.states[1].neighbors = {0};
    c.channels[2] = {ChannelEntry{0, 0}, ChannelEntry{0, 3}, ChannelEntry{1, 1}};

    auto ex = explicit_edges(c);
    CHECK(ex == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {0, 2}, {1, 0}});
    auto im = implicit_edges(c);
    REQUIRE(im.size() == 2);
    CHECK(im.at({2, 0}) == 2);
    CHECK(im.at({2, 1}) == 1);
    CHECK(undirected_projection(c) ==
          EdgeSet{UndirectedEdge(0, 1), UndirectedEdge(0, 2), UndirectedEdge(1, 2)});
}

TEST_CASE("worked example step", "[simulator]") {
    TreeMetric m(junction_tree());
    Configuration c;
    for (NodeId v : m.node_ids()) {
        c.states.emplace(v, NodeState(v, {}));
        c.channels[v];
    }
    c.states[0].neighbors = {1, 2};

    StepResult r = step(c, ScheduleEvent{0, {}}, m);
    CHECK(r.sent == std::vector<OutMessage>{OutMessage{1, 0, MessageKind::Introduction},
                                            OutMessage{1, 2, MessageKind::Delegation}});
    CHECK(r.config.states.at(0).neighbors == std::set<NodeId>{1});
    CHECK(r.config.channels.at(1) ==
          std::vector<ChannelEntry>{ChannelEntry{0, 1}, ChannelEntry{2, 1}});
    CHECK(r.config.step_index == 1);
    CHECK(c.step_index == 0);  // pure wrapper left the input alone
}

TEST_CASE("event plumbing edge cases", "[simulator]") {
    TreeMetric m(junction_tree());
    Configuration c = mst_config(m);
    c.channels[2].push_back(ChannelEntry{1, 0});

    SECTION("activating an empty node only advances the clock") {
        Configuration before = c;
        auto sent = apply_event(c, ScheduleEvent{2, {}}, m);
        // Node 2 held nothing and received nothing: no messages, no changes.
        CHECK(sent.empty());
        CHECK(c.states == before.states);
        CHECK(c.channels == before.channels);
        CHECK(c.step_index == before.step_index + 1);
    }
    SECTION("delivering an entry that is not pending is a kernel bug") {
        CHECK_THROWS_AS(apply_event(c, ScheduleEvent{2, {ChannelEntry{1, 99}}}, m), std::logic_error);
        CHECK_THROWS_AS(apply_event(c, ScheduleEvent{0, {ChannelEntry{1, 0}}}, m), std::logic_error);
    }
    SECTION("delivery consumes exactly the chosen entries") {
        c.channels[2].push_back(ChannelEntry{1, 4});
        apply_event(c, ScheduleEvent{2, {ChannelEntry{1, 0}}}, m);
        CHECK(c.channels.at(2) == std::vector<ChannelEntry>{ChannelEntry{1, 4}});
        CHECK(c.states.at(2).neighbors.count(1));
    }
}

TEST_CASE("extended values order correctly", "[simulator]") {
    auto inf = ExtendedRational::infinity();
    auto five = ExtendedRational::finite(Rational(5));
    auto seven = ExtendedRational::finite(Rational(7));
    CHECK(five <= seven);
    CHECK_FALSE(seven <= five);
    CHECK(five <= inf);
    CHECK_FALSE(inf <= five);
    CHECK(inf <= inf);
    CHECK(inf == ExtendedRational::infinity());
    CHECK(five == ExtendedRational::finite(Rational(5)));
    CHECK_FALSE(five == inf);
    CHECK(inf.to_string() == "inf");
    CHECK(five.to_string() == "5");
}

TEST_CASE("spanning potential", "[simulator]") {
    TreeMetric m(junction_tree());
    SECTION("attains the true MST weight on an MST configuration") {
        CHECK(potential_phi(mst_config(m), m) == ExtendedRational::finite(Rational(13)));
    }
    SECTION("infinite while the projection is disconnected") {
        Configuration c = mst_config(m);
        c.states[1].neighbors.erase(2);  // severs node 2 entirely
        CHECK(potential_phi(c, m) == ExtendedRational::infinity());
    }
    SECTION("matches an independent computation on churned configurations") {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            TreeMetric big(generate_random_tree(8, 3, 1, 40000, seed * 509));
            for (InitialShape shape : {InitialShape::RandomConnected, InitialShape::RandomMaybeDisconnected}) {
                Configuration c = churn(big, generate_initial(big, shape, seed), seed * 13, 6);
                auto want = naive_mst_weight(big, undirected_projection(c));
                auto got = potential_phi(c, big);
                if (want)
                    CHECK(got == ExtendedRational::finite(*want));
                else
                    CHECK(got == ExtendedRational::infinity());
            }
        }
    }
}

TEST_CASE("cleanup potential", "[simulator]") {
    TreeMetric m(junction_tree());
    SECTION("zero when only true-MST edges are present") {
        CHECK(potential_phi_tilde(mst_config(m), m) == Rational(0));
    }
    SECTION("reports the longest invalid edge") {
        Configuration c = mst_config(m);
        c.channels[2].push_back(ChannelEntry{0, 0});  // d(0,2) = 11, not an MST edge
        CHECK(potential_phi_tilde(c, m) == Rational(11));
    }
    SECTION("matches a brute-force scan on churned configurations") {
        for (std::uint64_t seed = 20; seed <= 32; ++seed) {
            TreeMetric big(generate_random_tree(9, 2, 1, 40000, seed * 727));
            Configuration c = churn(big, generate_initial(big, InitialShape::RandomConnected, seed), seed, 5);
            EdgeSet mst = mst_complete(big);
            Rational want(0);
            for (const auto& e : undirected_projection(c))
                if (!mst.count(e) && want < big.distance(e.a, e.b)) want = big.distance(e.a, e.b);
            CHECK(potential_phi_tilde(c, big) == want);
        }
    }
}

TEST_CASE("legality and convergence", "[simulator]") {
    TreeMetric m(junction_tree());
    Configuration c = mst_config(m);
    SECTION("explicit MST with silent channels") {
        CHECK(is_legal(c, m));
        CHECK(is_converged(c, m));
    }
    SECTION("holding both directions of an MST edge is still legal") {
        c.states[1].neighbors.insert(0);
        CHECK(is_legal(c, m));
        CHECK(is_converged(c, m));
    }
    SECTION("in-flight MST references do not break convergence") {
        c.channels[2].push_back(ChannelEntry{1, 5});
        c.channels[0].push_back(ChannelEntry{1, 3});  // also explicitly held
        CHECK(is_legal(c, m));
        CHECK(is_converged(c, m));
    }
    SECTION("a pending non-MST reference breaks both") {
        c.channels[2].push_back(ChannelEntry{0, 0});
        CHECK_FALSE(is_legal(c, m));
        CHECK_FALSE(is_converged(c, m));
    }
    SECTION("an explicit non-MST edge breaks legality") {
        c.states[0].neighbors.insert(2);
        CHECK_FALSE(is_legal(c, m));
        CHECK_FALSE(is_converged(c, m));
    }
    SECTION("a missing explicit MST edge breaks legality even if pending") {
        c.states[1].neighbors.erase(2);
        c.channels[1].push_back(ChannelEntry{2, 0});
        CHECK_FALSE(is_legal(c, m));
    }
    SECTION("per-component MSTs of a split projection are legal") {
        Configuration split;
        for (NodeId v : m.node_ids()) {
            split.states.emplace(v, NodeState(v, {}));
            split.channels[v];
        }
        split.states[0].neighbors = {1};  // {0,1} alone; node 2 isolated
        CHECK(is_legal(split, m));
        CHECK(is_converged(split, m));
        CHECK(potential_phi(split, m) == ExtendedRational::infinity());
    }
}

TEST_CASE("fast analysis agrees with the standalone definitions", "[simulator]") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        TreeMetric m(generate_random_tree(9, 3, 1, 30000, seed * 1021));
        ConfigAnalyzer analyzer(m);
        EdgeSet mst = mst_complete(m);
        for (InitialShape shape : {InitialShape::Line, InitialShape::Star, InitialShape::RandomConnected,
                                   InitialShape::RandomMaybeDisconnected, InitialShape::AdversarialLongEdges}) {
            for (int burn : {0, 4, 12}) {
                Configuration c = churn(m, generate_initial(m, shape, seed), seed * 3 + burn, burn);
                StepAnalysis a = analyzer.analyze(c);
                CHECK(a.phi == potential_phi(c, m));
                CHECK(a.phi_tilde == potential_phi_tilde(c, m));
                CHECK(a.legal == is_legal(c, m));
                CHECK(a.converged == is_converged(c, m));
                CHECK(a.legal == a.converged);  // quiescence adds nothing beyond legality
                CHECK(a.explicit_count == explicit_edges(c).size());
                std::size_t pending = 0;
                for (const auto& [id, entries] : c.channels) pending += entries.size();
                CHECK(a.implicit_count == pending);

                EdgeSet projection = undirected_projection(c);
                bool all_valid = std::all_of(mst.begin(), mst.end(),
                                             [&](const UndirectedEdge& e) { return projection.count(e) != 0; });
                CHECK(a.has_all_valid == all_valid);

                // Same component partition as the slow decomposition.
                auto comps = msf_components(m, projection);
                for (const auto& comp : comps) {
                    auto root = a.component_root[m.dense_index(comp.nodes.front())];
                    for (NodeId v : comp.nodes) CHECK(a.component_root[m.dense_index(v)] == root);
                }
                std::set<std::uint32_t> roots(a.component_root.begin(), a.component_root.end());
                CHECK(roots.size() == comps.size());

                // Explicit pid list really is the sorted undirected explicit set.
                EdgeSet explicit_undirected;
                for (const auto& [id, state] : c.states)
                    for (NodeId w : state.neighbors) explicit_undirected.insert(UndirectedEdge(id, w));
                CHECK(a.explicit_pids.size() == explicit_undirected.size());
                CHECK(std::is_sorted(a.explicit_pids.begin(), a.explicit_pids.end()));
                for (const auto& e : explicit_undirected)
                    CHECK(std::binary_search(a.explicit_pids.begin(), a.explicit_pids.end(), analyzer.pid(e.a, e.b)));
            }
        }
    }
}

TEST_CASE("initial shapes", "[simulator]") {
    TreeMetric m(generate_random_tree(12, 4, 1, 50000, 4242));
    SECTION("generation is deterministic per shape and seed") {
        for (InitialShape shape : {InitialShape::Line, InitialShape::Star, InitialShape::RandomConnected,
                                   InitialShape::RandomMaybeDisconnected, InitialShape::AdversarialLongEdges}) {
            Configuration a = generate_initial(m, shape, 7);
            Configuration b = generate_initial(m, shape, 7);
            CHECK(same_config(a, b));
            CHECK_FALSE(same_config(a, generate_initial(m, shape, 8)));
            CHECK_NOTHROW(validate_configuration(a, m));
            CHECK(a.step_index == 0);
        }
    }
    SECTION("line: the projection is a path") {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            Configuration c = generate_initial(m, InitialShape::Line, seed);
            EdgeSet p = undirected_projection(c);
            CHECK(p.size() == m.size() - 1);
            CHECK(mst_subgraph(m, p).has_value());  // spans, so it is a path
            std::map<NodeId, int> degree;
            for (const auto& e : p) {
                ++degree[e.a];
                ++degree[e.b];
            }
            for (const auto& [v, d] : degree) CHECK(d <= 2);
        }
    }
    SECTION("star: one hub holds everyone explicitly") {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            Configuration c = generate_initial(m, InitialShape::Star, seed);
            std::size_t hubs = 0;
            for (const auto& [id, state] : c.states) {
                if (state.neighbors.size() == m.size() - 1) ++hubs;
                else CHECK(state.neighbors.empty());
                CHECK(c.channels.at(id).empty());
            }
            CHECK(hubs == 1);
        }
    }
    SECTION("random-connected spans; disconnected splits into 2 or 3 parts") {
        std::set<std::size_t> part_counts;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            CHECK(mst_subgraph(m, undirected_projection(generate_initial(m, InitialShape::RandomConnected, seed)))
                      .has_value());
            auto comps = msf_components(
                m, undirected_projection(generate_initial(m, InitialShape::RandomMaybeDisconnected, seed)));
            CHECK(comps.size() >= 2);
            CHECK(comps.size() <= 3);
            part_counts.insert(comps.size());
        }
        CHECK(part_counts.size() > 1);  // both split sizes actually occur
    }
    SECTION("long-edges: the projection is the maximum spanning tree") {
        // Independent oracle: Prim for the maximum, growing from node 0.
        EdgeSet want;
        std::set<NodeId> in{m.node_ids()[0]};
        while (in.size() < m.size()) {
            bool have = false;
            NodeId ba = 0, bb = 0;
            for (NodeId a : in)
                for (NodeId b : m.node_ids()) {
                    if (in.count(b)) continue;
                    if (!have || m.distance(ba, bb) < m.distance(a, b)) {
                        ba = a;
                        bb = b;
                        have = true;
                    }
                }
            want.insert(UndirectedEdge(ba, bb));
            in.insert(bb);
        }
        for (std::uint64_t seed = 1; seed <= 6; ++seed)
            CHECK(undirected_projection(generate_initial(m, InitialShape::AdversarialLongEdges, seed)) == want);
    }
    SECTION("references land both explicitly and in channels across seeds") {
        bool saw_explicit = false, saw_pending = false;
        for (std::uint64_t seed = 1; seed <= 30 && !(saw_explicit && saw_pending); ++seed) {
            Configuration c = generate_initial(m, InitialShape::RandomConnected, seed);
            for (const auto& [id, state] : c.states)
                if (!state.neighbors.empty()) saw_explicit = true;
            for (const auto& [id, entries] : c.channels)
                if (!entries.empty()) saw_pending = true;
        }
        CHECK(saw_explicit);
        CHECK(saw_pending);
    }
    SECTION("shape names round-trip") {
        for (InitialShape shape : {InitialShape::Line, InitialShape::Star, InitialShape::RandomConnected,
                                   InitialShape::RandomMaybeDisconnected, InitialShape::AdversarialLongEdges})
            CHECK(parse_initial_shape(to_string(shape)) == shape);
        CHECK_THROWS_AS(parse_initial_shape("ring"), std::invalid_argument);
    }
}

TEST_CASE("invariant monitor raises on fabricated regressions", "[simulator]") {
    TreeMetric m(junction_tree());
    ConfigAnalyzer analyzer(m);

    StepAnalysis calm;  // disconnected-looking, passes every static check
    calm.phi = ExtendedRational::infinity();
    calm.component_root = {0, 1, 2};

    auto expect = [&](const StepAnalysis& prev, const StepAnalysis& cur, const std::string& name) {
        InvariantMonitor mon(m, analyzer);
        mon.check_initial(prev);
        try {
            mon.check_step(prev, cur, 1);
            FAIL("expected invariant '" + name + "' to trip");
        } catch (const InvariantViolation& v) {
            CHECK(v.invariant() == name);
            CHECK(v.step() == 1);
        }
    };

    SECTION("phi may never increase") {
        StepAnalysis prev = calm, cur = calm;
        prev.phi = ExtendedRational::finite(Rational(13));  // exactly the true MST weight
        cur.phi = ExtendedRational::finite(Rational(14));
        prev.component_root = cur.component_root = {0, 0, 0};
        expect(prev, cur, "phi-monotone");
    }
    SECTION("phi is bounded below by the true MST weight") {
        StepAnalysis bad = calm;
        bad.phi = ExtendedRational::finite(Rational(12));  // true weight is 13
        InvariantMonitor mon(m, analyzer);
        try {
            mon.check_initial(bad);
            FAIL("expected phi-lower-bound to trip");
        } catch (const InvariantViolation& v) {
            CHECK(v.invariant() == "phi-lower-bound");
        }
    }
    SECTION("a suboptimal connected structure must offer a delegation") {
        StepAnalysis bad = calm;
        bad.phi = ExtendedRational::finite(Rational(20));
        bad.component_root = {0, 0, 0};
        bad.msub = {{0, 1}, {1, 2}};  // is the true MST: no witness anywhere
        InvariantMonitor mon(m, analyzer);
        try {
            mon.check_initial(bad);
            FAIL("expected improvement-witness to trip");
        } catch (const InvariantViolation& v) {
            CHECK(v.invariant() == "improvement-witness");
        }
    }
    SECTION("components never split") {
        StepAnalysis prev = calm, cur = calm;
        prev.component_root = {0, 0, 2};
        cur.component_root = {0, 1, 2};
        expect(prev, cur, "component-split");
    }
    SECTION("true-MST edges stay once all are present") {
        StepAnalysis prev = calm, cur = calm;
        prev.has_all_valid = true;
        cur.has_all_valid = false;
        expect(prev, cur, "valid-edge-lost");
    }
    SECTION("cleanup potential never rises after all valid edges arrived") {
        StepAnalysis prev = calm, cur = calm;
        prev.has_all_valid = cur.has_all_valid = true;
        prev.phi_tilde = Rational(5);
        cur.phi_tilde = Rational(7);
        expect(prev, cur, "phi-tilde-monotone");
    }
    SECTION("legality is closed after first convergence") {
        StepAnalysis prev = calm, cur = calm;
        prev.legal = prev.converged = true;
        prev.explicit_pids = {1};
        cur.legal = cur.converged = false;
        expect(prev, cur, "closure");
    }
    SECTION("the explicit edge set freezes after first convergence") {
        StepAnalysis prev = calm, cur = calm;
        prev.legal = prev.converged = true;
        prev.explicit_pids = {1};
        cur.legal = cur.converged = true;
        cur.explicit_pids = {2};
        expect(prev, cur, "closure");
    }
}

// Minimal corner-to-corner walkthrough on the smallest interesting instance:
// three overlay nodes hanging off one internal junction, wired so that one
// overlay pair is NOT a tree-MST edge. Shows a node deciding between
// delegation and introduction, then drives the run to convergence.

#include <iostream>

#include "treemst/treemst.hpp"

using namespace treemst;

int main() {
    // Underlay: junction 3 with spokes to 2 (weight 6), 1 (weight 1), 0 (weight 5).
    // Overlay = {0, 1, 2}; distances 0-1: 6, 0-2: 11, 1-2: 7.
    WeightedTree tree({0, 1, 2, 3},
                      {TreeEdge{2, 3, Rational(6)}, TreeEdge{3, 1, Rational(1)}, TreeEdge{3, 0, Rational(5)}},
                      {0, 1, 2});
    TreeMetric metric(tree);

    std::cout << "distances: d(0,1)=" << metric.distance(0, 1).to_string()
              << " d(0,2)=" << metric.distance(0, 2).to_string()
              << " d(1,2)=" << metric.distance(1, 2).to_string() << "\n";

    EdgeSet mst = mst_complete(metric);
    std::cout << "true MST:";
    for (const auto& e : mst) std::cout << " {" << e.a << "," << e.b << "}";
    std::cout << "  (pair {0,2} is the excluded long edge)\n\n";

    // Node 0 starts knowing both others; everyone else knows nothing.
    Configuration c;
    for (NodeId v : metric.node_ids()) {
        c.states.emplace(v, NodeState(v, {}));
        c.channels[v];
    }
    c.states.at(0).neighbors = {1, 2};

    // First activation of node 0. Node 1 is strictly closer to both endpoints
    // of the pair (0,2) than they are to each other, so 0 hands its reference
    // of 2 over to 1 (delegation) and keeps 1 (introduction).
    ActivationResult first = activate(c.states.at(0), metric);
    std::cout << "first activation of node 0 sends:\n";
    for (const auto& msg : first.messages)
        std::cout << "  " << (msg.kind == MessageKind::Delegation ? "delegate" : "introduce") << " payload "
                  << msg.payload << " -> node " << msg.to << "\n";

    // Now the same thing through the kernel, to convergence.
    Scheduler sched(SchedulerPolicy::RoundRobinFullDelivery, 7, 4 * metric.size(), metric.node_ids());
    RunOptions opt;
    opt.step_budget = 50 * metric.size() * metric.size();
    SimulationTrace trace = run(c, sched, metric, opt);

    std::cout << "\n" << format_summary_line(trace) << "\n";
    std::cout << "final explicit edges (undirected):";
    EdgeSet final_edges;
    for (const auto& [id, state] : trace.final_config.states)
        for (NodeId w : state.neighbors) final_edges.insert(UndirectedEdge(id, w));
    for (const auto& e : final_edges) std::cout << " {" << e.a << "," << e.b << "}";
    std::cout << "\n";
    return final_edges == mst ? 0 : 1;
}

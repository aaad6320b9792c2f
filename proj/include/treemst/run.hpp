#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "treemst/analysis.hpp"
#include "treemst/scheduler.hpp"

namespace treemst {

enum class RunOutcome { Converged, BudgetExhausted };

inline const char* to_string(RunOutcome o) {
    return o == RunOutcome::Converged ? "converged" : "budget";
}

struct StepSample {
    std::uint64_t step = 0;
    ExtendedRational phi;
    Rational phi_tilde;
    std::size_t explicit_count = 0;
    std::size_t implicit_count = 0;
    bool legal = false;
    std::uint64_t round = 0;  // completed rounds at this configuration
};

struct SimulationTrace {
    Configuration initial;
    Configuration final_config;
    std::vector<ScheduleEvent> events;        // when record_events
    std::vector<std::vector<OutMessage>> sent;  // aligned with events
    std::vector<StepSample> samples;          // when record_samples: one per configuration
    std::vector<std::uint64_t> round_starts;
    RunOutcome outcome = RunOutcome::BudgetExhausted;
    std::uint64_t steps = 0;   // events executed
    std::uint64_t rounds = 0;  // rounds started (last may be partial)
    std::optional<std::uint64_t> converged_at;  // first converged configuration
};

struct RunOptions {
    std::uint64_t step_budget = 0;
    bool assertions = true;
    bool stop_on_convergence = true;
    bool record_events = true;
    bool record_samples = true;
    OrderPolicy order_policy = OrderPolicy::IdAscending;
    std::uint64_t order_seed = 0;
    // Called after every applied event with the new configuration.
    std::function<void(const Configuration&, const StepAnalysis&)> observer;
};

/// Drive one simulation: draw events from the scheduler, apply them, analyze
/// every configuration, and (with assertions on) stop hard on any invariant
/// violation. Deterministic given the initial configuration, the scheduler,
/// and the order seed.
inline SimulationTrace run(const Configuration& initial, Scheduler& sched, const TreeMetric& m,
                           const RunOptions& opt) {
    validate_configuration(initial, m);
    SimulationTrace trace;
    trace.initial = initial;

    ConfigAnalyzer analyzer(m);
    InvariantMonitor monitor(m, analyzer);
    RoundTracker tracker(m.node_ids());
    Configuration c = initial;

    StepAnalysis current = analyzer.analyze(c);
    if (opt.assertions) monitor.check_initial(current);
    auto sample = [&](const StepAnalysis& a) {
        if (!opt.record_samples) return;
        trace.samples.push_back(StepSample{c.step_index, a.phi, a.phi_tilde, a.explicit_count, a.implicit_count,
                                           a.legal, tracker.completed()});
    };
    sample(current);
    if (current.converged) trace.converged_at = 0;

    bool stopped = current.converged && opt.stop_on_convergence;
    while (!stopped && trace.steps < opt.step_budget) {
        if (!tracker.active()) tracker.begin(c.channels, c.step_index);
        ScheduleEvent event = sched.next(c);
        ActivationOrder order{opt.order_policy, mix_seed(opt.order_seed, c.step_index)};
        std::vector<OutMessage> sent = apply_event(c, event, m, order);
        tracker.note(event);
        ++trace.steps;

        StepAnalysis next = analyzer.analyze(c);
        if (opt.assertions) monitor.check_step(current, next, c.step_index);
        if (opt.record_events) {
            trace.events.push_back(std::move(event));
            trace.sent.push_back(std::move(sent));
        }
        current = std::move(next);
        sample(current);
        if (current.converged && !trace.converged_at) trace.converged_at = c.step_index;
        if (opt.observer) opt.observer(c, current);
        stopped = current.converged && opt.stop_on_convergence;
    }

    trace.outcome = current.converged ? RunOutcome::Converged : RunOutcome::BudgetExhausted;
    trace.round_starts = tracker.round_starts();
    trace.rounds = tracker.rounds_started();
    trace.final_config = std::move(c);

    // Independent re-check of the declared outcome through the slow path: the
    // observer's convergence claim must survive a from-scratch evaluation.
    if (opt.assertions && trace.outcome == RunOutcome::Converged && !is_converged(trace.final_config, m))
        throw InvariantViolation(trace.final_config.step_index, "termination-detection",
                                 "fast-path convergence not confirmed by standalone check");
    return trace;
}

/// Recompute the greedy round partition from a recorded trace (requires
/// events + sent messages). Matches the online partition run() produces.
inline std::vector<std::uint64_t> round_boundaries(const SimulationTrace& trace) {
    if (trace.events.size() != trace.sent.size())
        throw std::invalid_argument("round_boundaries: trace lacks recorded events/messages");
    std::vector<NodeId> nodes;
    for (const auto& [id, state] : trace.initial.states) nodes.push_back(id);
    RoundTracker tracker(nodes);
    std::map<NodeId, std::vector<ChannelEntry>> channels = trace.initial.channels;
    std::uint64_t step_index = trace.initial.step_index;
    for (std::size_t k = 0; k < trace.events.size(); ++k) {
        if (!tracker.active()) tracker.begin(channels, step_index);
        const ScheduleEvent& e = trace.events[k];
        auto& channel = channels[e.node];
        for (const auto& want : e.delivered) {
            auto found = std::find(channel.begin(), channel.end(), want);
            if (found == channel.end())
                throw std::logic_error("round_boundaries: trace delivers a message that is not pending");
            channel.erase(found);
        }
        ++step_index;
        for (const auto& msg : trace.sent[k]) channels[msg.to].push_back(ChannelEntry{msg.payload, step_index});
        tracker.note(e);
    }
    return tracker.round_starts();
}

}  // namespace treemst

#pragma once

#include <string>

#include <json.hpp>

#include "treemst/run.hpp"

namespace treemst {

inline std::string format_sample_line(const StepSample& s) {
    return "step=" + std::to_string(s.step) + " phi=" + s.phi.to_string() + " phi_tilde=" +
           s.phi_tilde.to_string() + " explicit=" + std::to_string(s.explicit_count) + " implicit=" +
           std::to_string(s.implicit_count) + " legal=" + (s.legal ? std::string("1") : std::string("0")) +
           " round=" + std::to_string(s.round);
}

inline std::string format_summary_line(const SimulationTrace& t) {
    return std::string("outcome=") + to_string(t.outcome) + " steps=" + std::to_string(t.steps) +
           " rounds=" + std::to_string(t.rounds);
}

inline nlohmann::ordered_json configuration_to_json(const Configuration& c) {
    nlohmann::ordered_json j;
    j["step"] = c.step_index;
    auto& states = j["states"] = nlohmann::ordered_json::object();
    for (const auto& [id, state] : c.states) {
        nlohmann::ordered_json refs = nlohmann::ordered_json::array();
        for (NodeId w : state.neighbors) refs.push_back(w);
        states[std::to_string(id)] = std::move(refs);
    }
    auto& channels = j["channels"] = nlohmann::ordered_json::object();
    for (const auto& [id, entries] : c.channels) {
        nlohmann::ordered_json pending = nlohmann::ordered_json::array();
        for (const auto& e : entries)
            pending.push_back(nlohmann::ordered_json{{"payload", e.payload}, {"arrival", e.arrival_step}});
        channels[std::to_string(id)] = std::move(pending);
    }
    return j;
}

/// Full textual trace: a config-echo comment so the output alone suffices to
/// re-run the command, one line per sampled configuration, the summary, and
/// the final configuration as one JSON line.
inline std::string format_trace(const SimulationTrace& t, const std::string& config_echo) {
    std::string out;
    if (!config_echo.empty()) out += "# cmd: " + config_echo + "\n";
    for (const auto& s : t.samples) out += format_sample_line(s) + "\n";
    out += format_summary_line(t) + "\n";
    out += "final=" + configuration_to_json(t.final_config).dump() + "\n";
    return out;
}

}  // namespace treemst

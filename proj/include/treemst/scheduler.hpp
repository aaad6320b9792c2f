#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "treemst/simulator.hpp"

namespace treemst {

enum class SchedulerPolicy { RoundRobinFullDelivery, UniformRandomFair, AdversarialStarve };

inline const char* to_string(SchedulerPolicy p) {
    switch (p) {
        case SchedulerPolicy::RoundRobinFullDelivery: return "rr";
        case SchedulerPolicy::UniformRandomFair: return "random";
        case SchedulerPolicy::AdversarialStarve: return "adversarial";
    }
    return "?";
}

inline SchedulerPolicy parse_scheduler_policy(const std::string& s) {
    if (s == "rr") return SchedulerPolicy::RoundRobinFullDelivery;
    if (s == "random") return SchedulerPolicy::UniformRandomFair;
    if (s == "adversarial") return SchedulerPolicy::AdversarialStarve;
    throw std::invalid_argument("unknown scheduler policy: " + s);
}

/// Event source. All three policies are deterministic given the seed and keep
/// two promises: every node is activated within any window of `horizon`
/// events (weak fairness — enforced by forcing the most-starved node once its
/// activation gap nears the horizon), and every pending message is delivered
/// within a policy-dependent finite number of events (fair receipt).
///
///  - rr: nodes in ascending id order, entire channel delivered on activation.
///  - random: uniform node choice unless fairness forces one; each pending
///    message is delivered with probability 1/2, or certainly once its age
///    reaches the horizon.
///  - adversarial: starves every message until its age reaches the horizon,
///    then delivers the eligible batch newest-first (maximally non-FIFO);
///    activates whichever node has waited longest.
class Scheduler {
public:
    Scheduler(SchedulerPolicy policy, std::uint64_t seed, std::uint64_t horizon, const std::vector<NodeId>& nodes)
        : policy_(policy), horizon_(horizon), nodes_(nodes), rng_(seeded_rng(mix_seed(seed, 0x5ced))) {
        if (nodes_.empty()) throw std::invalid_argument("Scheduler: empty node set");
        const std::uint64_t n = nodes_.size();
        if (policy_ != SchedulerPolicy::RoundRobinFullDelivery && horizon_ < 2 * n)
            throw std::invalid_argument("Scheduler: fairness horizon must be at least 2x node count (got " +
                                        std::to_string(horizon_) + " for " + std::to_string(n) + " nodes)");
        // Stagger the virtual "last activation" so fairness deadlines never
        // pile up: node k starts as if activated at step k - n.
        last_activated_.resize(n);
        for (std::uint64_t k = 0; k < n; ++k)
            last_activated_[k] = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(n);
        tie_rank_.resize(n);
        for (std::uint64_t k = 0; k < n; ++k) tie_rank_[k] = k;
        shuffle_in_place(tie_rank_, rng_);
    }

    std::uint64_t horizon() const { return horizon_; }

    ScheduleEvent next(const Configuration& c) {
        const std::int64_t t = static_cast<std::int64_t>(c.step_index);
        std::size_t pick = 0;
        switch (policy_) {
            case SchedulerPolicy::RoundRobinFullDelivery:
                pick = rr_cursor_;
                rr_cursor_ = (rr_cursor_ + 1) % nodes_.size();
                break;
            case SchedulerPolicy::UniformRandomFair: {
                std::size_t forced = most_starved(t);
                std::int64_t threshold = static_cast<std::int64_t>(horizon_ - nodes_.size());
                if (t - last_activated_[forced] >= threshold)
                    pick = forced;
                else
                    pick = uniform_below(rng_, nodes_.size());
                break;
            }
            case SchedulerPolicy::AdversarialStarve:
                pick = most_starved(t);
                break;
        }
        last_activated_[pick] = t;

        ScheduleEvent event;
        event.node = nodes_[pick];
        auto channel = c.channels.find(event.node);
        if (channel != c.channels.end()) select_delivery(channel->second, t, event.delivered);
        return event;
    }

private:
    std::size_t most_starved(std::int64_t t) const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < nodes_.size(); ++k) {
            std::int64_t gk = t - last_activated_[k];
            std::int64_t gb = t - last_activated_[best];
            if (gk > gb || (gk == gb && tie_rank_[k] < tie_rank_[best])) best = k;
        }
        return best;
    }

    void select_delivery(const std::vector<ChannelEntry>& channel, std::int64_t t, std::vector<ChannelEntry>& out) {
        switch (policy_) {
            case SchedulerPolicy::RoundRobinFullDelivery:
                out = channel;
                break;
            case SchedulerPolicy::UniformRandomFair:
                for (const auto& e : channel) {
                    std::int64_t age = t - static_cast<std::int64_t>(e.arrival_step);
                    if (age >= static_cast<std::int64_t>(horizon_) || coin_flip(rng_)) out.push_back(e);
                }
                break;
            case SchedulerPolicy::AdversarialStarve:
                for (auto it = channel.rbegin(); it != channel.rend(); ++it) {
                    std::int64_t age = t - static_cast<std::int64_t>(it->arrival_step);
                    if (age >= static_cast<std::int64_t>(horizon_)) out.push_back(*it);
                }
                break;
        }
    }

    SchedulerPolicy policy_;
    std::uint64_t horizon_;
    std::vector<NodeId> nodes_;
    SimRng rng_;
    std::vector<std::int64_t> last_activated_;
    std::vector<std::uint64_t> tie_rank_;
    std::size_t rr_cursor_ = 0;
};

/// Online greedy round partition: a round is the shortest event run in which
/// every node is activated at least once and every message pending when the
/// round began has been delivered.
class RoundTracker {
public:
    explicit RoundTracker(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {}

    bool active() const { return active_; }
    std::size_t completed() const { return completed_; }
    const std::vector<std::uint64_t>& round_starts() const { return starts_; }
    std::uint64_t rounds_started() const { return starts_.size(); }

    void begin(const std::map<NodeId, std::vector<ChannelEntry>>& channels, std::uint64_t step_index) {
        watermark_.clear();
        pending_ = 0;
        for (const auto& [node, entries] : channels)
            for (const auto& e : entries) {
                ++watermark_[std::make_tuple(node, e.payload, e.arrival_step)];
                ++pending_;
            }
        activated_.clear();
        active_ = true;
        starts_.push_back(step_index);
    }

    void note(const ScheduleEvent& e) {
        activated_.insert(e.node);
        for (const auto& d : e.delivered) {
            auto it = watermark_.find(std::make_tuple(e.node, d.payload, d.arrival_step));
            if (it != watermark_.end()) {
                if (--it->second == 0) watermark_.erase(it);
                --pending_;
            }
        }
        if (activated_.size() == nodes_.size() && pending_ == 0) {
            active_ = false;
            ++completed_;
        }
    }

private:
    std::vector<NodeId> nodes_;
    std::map<std::tuple<NodeId, NodeId, std::uint64_t>, std::size_t> watermark_;
    std::size_t pending_ = 0;
    std::set<NodeId> activated_;
    bool active_ = false;
    std::size_t completed_ = 0;
    std::vector<std::uint64_t> starts_;
};

}  // namespace treemst

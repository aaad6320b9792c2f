#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "treemst/simulator.hpp"

namespace treemst {

/// Everything the kernel wants to know about one configuration, computed in
/// one pass. Pair ids are dense_index(a) * n + dense_index(b) with a < b in
/// dense order.
struct StepAnalysis {
    ExtendedRational phi;
    Rational phi_tilde;
    std::size_t explicit_count = 0;  // directed
    std::size_t implicit_count = 0;  // with multiplicity
    bool legal = false;
    bool converged = false;
    bool has_all_valid = false;                      // every true-MST edge present in the projection
    std::vector<std::uint32_t> component_root;       // per dense node index
    std::vector<std::uint32_t> explicit_pids;        // undirected explicit projection, sorted
    std::vector<std::pair<NodeId, NodeId>> msub;     // MST over present edges (empty if disconnected)
};

/// Recomputes StepAnalysis from scratch each step, but over preallocated
/// buffers and the metric's presorted pair list, so a step costs O(pairs)
/// rather than O(pairs log pairs). One instance per run; not thread-safe.
class ConfigAnalyzer {
public:
    explicit ConfigAnalyzer(const TreeMetric& m) : m_(&m), n_(m.size()) {
        mst_flag_.assign(n_ * n_, 0);
        for (const auto& e : mst_complete(m)) {
            mst_flag_[pid(e.a, e.b)] = 1;
            mst_weight_ += m.distance(e.a, e.b);
            ++mst_size_;
        }
        expl_flag_.assign(n_ * n_, 0);
        any_flag_.assign(n_ * n_, 0);
        target_flag_.assign(n_ * n_, 0);
        uf_.resize(n_);
        uf2_.resize(n_);
    }

    const Rational& global_mst_weight() const { return mst_weight_; }

    std::uint32_t pid(NodeId a, NodeId b) const {
        std::uint32_t i = static_cast<std::uint32_t>(m_->dense_index(a));
        std::uint32_t j = static_cast<std::uint32_t>(m_->dense_index(b));
        if (i > j) std::swap(i, j);
        return i * static_cast<std::uint32_t>(n_) + j;
    }

    StepAnalysis analyze(const Configuration& c) {
        StepAnalysis a;
        for (std::uint32_t p : touched_) {
            expl_flag_[p] = 0;
            any_flag_[p] = 0;
            target_flag_[p] = 0;
        }
        touched_.clear();

        for (const auto& [id, state] : c.states) {
            a.explicit_count += state.neighbors.size();
            for (NodeId w : state.neighbors) {
                std::uint32_t p = pid(id, w);
                if (!any_flag_[p]) touched_.push_back(p);
                expl_flag_[p] = 1;
                any_flag_[p] = 1;
            }
        }
        for (const auto& [id, entries] : c.channels) {
            a.implicit_count += entries.size();
            for (const auto& e : entries) {
                std::uint32_t p = pid(id, e.payload);
                if (!any_flag_[p]) touched_.push_back(p);
                any_flag_[p] = 1;
            }
        }
        a.explicit_pids.reserve(touched_.size());
        for (std::uint32_t p : touched_)
            if (expl_flag_[p]) a.explicit_pids.push_back(p);
        std::sort(a.explicit_pids.begin(), a.explicit_pids.end());

        // Components of the projected graph.
        for (std::size_t i = 0; i < n_; ++i) uf_[i] = static_cast<std::uint32_t>(i);
        std::size_t components = n_;
        for (std::uint32_t p : touched_)
            if (unite(uf_, p / n_, p % n_)) --components;
        a.component_root.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) a.component_root[i] = find(uf_, static_cast<std::uint32_t>(i));

        // MST over present edges (Kruskal over the presorted global pair list).
        for (std::size_t i = 0; i < n_; ++i) uf2_[i] = static_cast<std::uint32_t>(i);
        Rational msub_weight(0);
        for (const auto& [x, y] : m_->pairs_by_distance()) {
            std::uint32_t p = pid(x, y);
            if (!any_flag_[p]) continue;
            if (unite(uf2_, p / n_, p % n_)) {
                a.msub.emplace_back(x, y);
                msub_weight += m_->distance(x, y);
            }
        }
        a.phi = components == 1 ? ExtendedRational::finite(msub_weight) : ExtendedRational::infinity();

        // Per-component target MSF over the complete metric.
        for (std::size_t i = 0; i < n_; ++i) uf2_[i] = static_cast<std::uint32_t>(i);
        std::size_t target_size = 0;
        bool explicit_matches = true;
        for (const auto& [x, y] : m_->pairs_by_distance()) {
            std::uint32_t p = pid(x, y);
            std::uint32_t i = p / n_, j = p % n_;
            if (a.component_root[i] != a.component_root[j]) continue;
            if (unite(uf2_, i, j)) {
                target_flag_[p] = 1;
                ++target_size;
                if (!expl_flag_[p]) explicit_matches = false;  // MST edge not explicitly present
            }
        }
        if (a.explicit_pids.size() != target_size) explicit_matches = false;

        // All present pairs classified: longest invalid one, whole-MST containment.
        std::size_t valid_present = 0;
        const auto& pairs = m_->pairs_by_distance();
        for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
            std::uint32_t p = pid(it->first, it->second);
            if (!any_flag_[p]) continue;
            if (mst_flag_[p]) {
                ++valid_present;
            } else if (a.phi_tilde == Rational(0)) {
                a.phi_tilde = m_->distance(it->first, it->second);
            }
        }
        a.has_all_valid = valid_present == mst_size_;

        bool channels_clean = true;
        for (const auto& [id, entries] : c.channels)
            for (const auto& e : entries)
                if (!target_flag_[pid(id, e.payload)]) {
                    channels_clean = false;
                    break;
                }
        a.legal = explicit_matches && channels_clean;
        // Legality already confines channels to component-MST references, so
        // the quiescence condition adds nothing on top — asserted by tests
        // against the standalone is_converged.
        a.converged = a.legal && channels_clean;
        return a;
    }

private:
    static std::uint32_t find(std::vector<std::uint32_t>& uf, std::uint32_t x) {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    }
    static bool unite(std::vector<std::uint32_t>& uf, std::uint32_t a, std::uint32_t b) {
        a = find(uf, a);
        b = find(uf, b);
        if (a == b) return false;
        uf[a] = b;
        return true;
    }

    const TreeMetric* m_;
    std::size_t n_;
    std::vector<char> mst_flag_, expl_flag_, any_flag_, target_flag_;
    Rational mst_weight_;
    std::size_t mst_size_ = 0;
    std::vector<std::uint32_t> uf_, uf2_;
    std::vector<std::uint32_t> touched_;
};

/// Thrown when a step breaks one of the analysis invariants. Carries enough
/// context to reproduce: the step index and which invariant tripped.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(std::uint64_t step, std::string invariant, const std::string& detail)
        : std::runtime_error("invariant '" + invariant + "' violated at step " + std::to_string(step) +
                             (detail.empty() ? "" : ": " + detail)),
          step_(step),
          invariant_(std::move(invariant)) {}

    std::uint64_t step() const { return step_; }
    const std::string& invariant() const { return invariant_; }

private:
    std::uint64_t step_;
    std::string invariant_;
};

/// Stateful checker applied to consecutive analyses. The latched conditions
/// (all valid edges present; first convergence) are one-way doors: once they
/// open, later configurations must keep their guarantees forever.
class InvariantMonitor {
public:
    InvariantMonitor(const TreeMetric& m, const ConfigAnalyzer& analyzer) : m_(&m), analyzer_(&analyzer) {}

    void check_initial(const StepAnalysis& a) {
        check_static(a, 0);
        latch(a);
    }

    void check_step(const StepAnalysis& prev, const StepAnalysis& cur, std::uint64_t step) {
        if (!(cur.phi <= prev.phi))
            throw InvariantViolation(step, "phi-monotone",
                                     prev.phi.to_string() + " -> " + cur.phi.to_string());
        check_static(cur, step);

        // No component may split: nodes sharing an old root must share a new one.
        std::vector<std::uint32_t> mapped(prev.component_root.size(), UINT32_MAX);
        for (std::size_t i = 0; i < prev.component_root.size(); ++i) {
            std::uint32_t& slot = mapped[prev.component_root[i]];
            if (slot == UINT32_MAX)
                slot = cur.component_root[i];
            else if (slot != cur.component_root[i])
                throw InvariantViolation(step, "component-split",
                                         "nodes sharing a component were separated");
        }

        if (all_valid_latched_) {
            if (!cur.has_all_valid)
                throw InvariantViolation(step, "valid-edge-lost",
                                         "a true-MST edge vanished from the projection");
            if (phi_tilde_floor_ < cur.phi_tilde)
                throw InvariantViolation(step, "phi-tilde-monotone",
                                         phi_tilde_floor_.to_string() + " -> " + cur.phi_tilde.to_string());
        }
        if (closure_latched_) {
            if (!cur.legal) throw InvariantViolation(step, "closure", "legality lost after convergence");
            if (cur.explicit_pids != closed_explicit_pids_)
                throw InvariantViolation(step, "closure", "explicit edge set changed after convergence");
        }
        latch(cur);
    }

private:
    void check_static(const StepAnalysis& a, std::uint64_t step) {
        if (!a.phi.infinite && a.phi.value < analyzer_->global_mst_weight())
            throw InvariantViolation(step, "phi-lower-bound",
                                     a.phi.to_string() + " < " + analyzer_->global_mst_weight().to_string());
        // A connected but suboptimal edge set must expose an improvement: some
        // node with two tree neighbors u, w where u vouches for (v, w).
        if (!a.phi.infinite && analyzer_->global_mst_weight() < a.phi.value) {
            std::vector<std::vector<NodeId>> adj(m_->size());
            for (const auto& [x, y] : a.msub) {
                adj[m_->dense_index(x)].push_back(y);
                adj[m_->dense_index(y)].push_back(x);
            }
            bool found = false;
            for (NodeId v : m_->node_ids()) {
                const auto& nb = adj[m_->dense_index(v)];
                for (std::size_t i = 0; i < nb.size() && !found; ++i)
                    for (std::size_t j = 0; j < nb.size() && !found; ++j)
                        if (i != j && is_relative_witness(*m_, nb[i], v, nb[j])) found = true;
                if (found) break;
            }
            if (!found)
                throw InvariantViolation(step, "improvement-witness",
                                         "suboptimal spanning structure admits no delegation witness");
        }
    }

    void latch(const StepAnalysis& a) {
        if (!all_valid_latched_ && a.has_all_valid) {
            all_valid_latched_ = true;
            phi_tilde_floor_ = a.phi_tilde;
        } else if (all_valid_latched_) {
            phi_tilde_floor_ = a.phi_tilde;
        }
        if (!closure_latched_ && a.converged) {
            closure_latched_ = true;
            closed_explicit_pids_ = a.explicit_pids;
        }
    }

    const TreeMetric* m_;
    const ConfigAnalyzer* analyzer_;
    bool all_valid_latched_ = false;
    Rational phi_tilde_floor_;
    bool closure_latched_ = false;
    std::vector<std::uint32_t> closed_explicit_pids_;
};

}  // namespace treemst

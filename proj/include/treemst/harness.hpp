#pragma once

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "treemst/trace_io.hpp"
#include "treemst/tree.hpp"

namespace treemst {

// ---------------------------------------------------------------------------
// gen-tree

struct GenTreeArgs {
    std::size_t n_overlay = 8;
    std::size_t n_internal = 4;
    std::int64_t weight_lo = 1;
    std::int64_t weight_hi = 1000000;
    std::uint64_t seed = 1;
    std::string out_path;  // empty: tree to stdout
};

inline std::string echo_gen_tree(const GenTreeArgs& a) {
    return "gen-tree --overlay " + std::to_string(a.n_overlay) + " --internal " + std::to_string(a.n_internal) +
           " --weight-lo " + std::to_string(a.weight_lo) + " --weight-hi " + std::to_string(a.weight_hi) +
           " --seed " + std::to_string(a.seed) + (a.out_path.empty() ? "" : " --out " + a.out_path);
}

inline int cmd_gen_tree(const GenTreeArgs& args, std::ostream& out, std::ostream& err) {
    try {
        std::size_t retries = 0;
        WeightedTree tree = generate_random_tree(args.n_overlay, args.n_internal, args.weight_lo, args.weight_hi,
                                                 args.seed, &retries);
        std::size_t n = tree.overlay_nodes().size();
        out << "# cmd: " << echo_gen_tree(args) << "\n";
        out << "distinct-distances=ok pairs=" << n * (n - 1) / 2 << " weight-retries=" << retries << "\n";
        if (args.out_path.empty())
            out << format_tree(tree);
        else
            save_tree_file(tree, args.out_path);
        return 0;
    } catch (const std::exception& e) {
        err << "gen-tree failed: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string tree_path;
    std::uint64_t seed = 1;
    std::string scheduler = "rr";
    std::uint64_t fairness_horizon = 0;  // 0: default 4N
    std::string initial = "random";
    std::uint64_t budget_mult = 50;
    bool assertions = true;
    std::string out_path;  // empty: trace to stdout
};

inline std::string echo_run(const RunArgs& a) {
    return "run --tree " + a.tree_path + " --seed " + std::to_string(a.seed) + " --scheduler " + a.scheduler +
           " --fairness-horizon " + std::to_string(a.fairness_horizon) + " --initial " + a.initial +
           " --budget-mult " + std::to_string(a.budget_mult) + " --assert " + (a.assertions ? "on" : "off") +
           (a.out_path.empty() ? "" : " --out " + a.out_path);
}

inline int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    try {
        WeightedTree tree = load_tree_file(args.tree_path);
        TreeMetric metric(tree);
        const std::uint64_t n = metric.size();
        std::uint64_t horizon = args.fairness_horizon ? args.fairness_horizon : 4 * n;

        Configuration initial = generate_initial(metric, parse_initial_shape(args.initial), args.seed);
        Scheduler sched(parse_scheduler_policy(args.scheduler), args.seed, horizon, metric.node_ids());
        RunOptions opt;
        opt.step_budget = args.budget_mult * n * n;
        opt.assertions = args.assertions;
        opt.order_policy = OrderPolicy::IdAscending;
        opt.order_seed = args.seed;

        SimulationTrace trace = run(initial, sched, metric, opt);
        std::string text = format_trace(trace, echo_run(args));
        if (args.out_path.empty()) {
            out << text;
        } else {
            std::ofstream f(args.out_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + args.out_path);
            f << text;
            out << format_summary_line(trace) << "\n";
        }
        return trace.outcome == RunOutcome::Converged ? 0 : 1;
    } catch (const InvariantViolation& v) {
        err << "run aborted: " << v.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// sweep

struct ExperimentConfig {
    std::vector<std::uint64_t> n_values;
    std::uint64_t seeds_per_n = 10;
    std::string scheduler = "rr";
    std::uint64_t fairness_horizon = 0;  // 0: default 4N per cell
    std::string initial = "random";
    std::uint64_t budget_mult = 50;
    std::uint64_t base_seed = 1;
    bool parallel = false;
    std::string out_path;
};

struct SweepRecord {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::string outcome;  // converged | budget | error:<what>
    std::uint64_t steps = 0;
    std::uint64_t rounds = 0;
    std::string phi;  // final potential
};

struct SweepResult {
    std::vector<SweepRecord> records;
    bool all_converged = true;
};

inline std::string echo_sweep(const ExperimentConfig& cfg) {
    std::string ns;
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) ns += (i ? "," : "") + std::to_string(cfg.n_values[i]);
    return "sweep --n " + ns + " --seeds " + std::to_string(cfg.seeds_per_n) + " --scheduler " + cfg.scheduler +
           " --fairness-horizon " + std::to_string(cfg.fairness_horizon) + " --initial " + cfg.initial +
           " --budget-mult " + std::to_string(cfg.budget_mult) + " --seed " + std::to_string(cfg.base_seed) +
           (cfg.parallel ? " --parallel" : "") + (cfg.out_path.empty() ? "" : " --out " + cfg.out_path);
}

/// One sweep cell, isolated so cells can run on any thread. Order policy
/// rotates with (n + seed) so all three iteration orders see coverage.
inline SweepRecord sweep_cell(const ExperimentConfig& cfg, std::uint64_t n, std::uint64_t seed) {
    SweepRecord rec;
    rec.n = n;
    rec.seed = seed;
    try {
        std::uint64_t tree_seed = mix_seed(mix_seed(cfg.base_seed, n), seed);
        WeightedTree tree = generate_random_tree(n, n / 2, 1, 1000000, tree_seed);
        TreeMetric metric(tree);
        std::uint64_t horizon = cfg.fairness_horizon ? cfg.fairness_horizon : 4 * n;

        Configuration initial = generate_initial(metric, parse_initial_shape(cfg.initial), mix_seed(tree_seed, 0xc0));
        Scheduler sched(parse_scheduler_policy(cfg.scheduler), mix_seed(tree_seed, 0x5c), horizon, metric.node_ids());
        RunOptions opt;
        opt.step_budget = cfg.budget_mult * n * n;
        opt.assertions = true;
        opt.record_events = false;
        opt.record_samples = false;
        opt.order_policy = static_cast<OrderPolicy>((n + seed) % 3);
        opt.order_seed = mix_seed(tree_seed, 0x0d);

        SimulationTrace trace = run(initial, sched, metric, opt);
        rec.outcome = to_string(trace.outcome);
        rec.steps = trace.steps;
        rec.rounds = trace.rounds;
        rec.phi = potential_phi(trace.final_config, metric).to_string();
    } catch (const std::exception& e) {
        std::string what = e.what();
        for (char& c : what)
            if (c == '\n') c = ' ';
        rec.outcome = "error:" + what;
    }
    return rec;
}

inline SweepResult sweep(const ExperimentConfig& cfg, std::ostream& out) {
    SweepResult result;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
    for (std::uint64_t n : cfg.n_values)
        for (std::uint64_t s = 0; s < cfg.seeds_per_n; ++s) cells.emplace_back(n, s);
    result.records.resize(cells.size());

    if (cfg.parallel && cells.size() > 1) {
        std::atomic<std::size_t> cursor{0};
        std::size_t workers = std::min<std::size_t>(std::thread::hardware_concurrency(), cells.size());
        if (workers == 0) workers = 1;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = cursor.fetch_add(1); k < cells.size(); k = cursor.fetch_add(1))
                    result.records[k] = sweep_cell(cfg, cells[k].first, cells[k].second);
            });
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t k = 0; k < cells.size(); ++k)
            result.records[k] = sweep_cell(cfg, cells[k].first, cells[k].second);
    }

    out << "# cmd: " << echo_sweep(cfg) << "\n";
    for (const auto& r : result.records) {
        out << "record n=" << r.n << " seed=" << r.seed << " outcome=" << r.outcome << " steps=" << r.steps
            << " rounds=" << r.rounds << " phi=" << r.phi << "\n";
        if (r.outcome != "converged") result.all_converged = false;
    }
    // Aggregates: recomputable from the records above.
    bool any = false;
    Rational worst_ratio(0);
    for (std::uint64_t n : cfg.n_values) {
        std::uint64_t max_rounds = 0, max_steps = 0, converged = 0, total = 0;
        for (const auto& r : result.records) {
            if (r.n != n) continue;
            ++total;
            if (r.outcome == "converged") ++converged;
            max_rounds = std::max(max_rounds, r.rounds);
            max_steps = std::max(max_steps, r.steps);
        }
        if (!total) continue;
        out << "aggregate n=" << n << " converged=" << converged << "/" << total << " max_steps=" << max_steps
            << " max_rounds=" << max_rounds << "\n";
        Rational ratio(static_cast<std::int64_t>(max_rounds), static_cast<std::int64_t>(n * n));
        if (!any || worst_ratio < ratio) worst_ratio = ratio;
        any = true;
    }
    if (any) out << "aggregate_all max_rounds_over_n2=" << worst_ratio.to_string() << "\n";
    out << "sweep=" << (result.all_converged ? "ok" : "failed") << "\n";
    return result;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + cfg.out_path);
            SweepResult r = sweep(cfg, f);
            out << "sweep=" << (r.all_converged ? "ok" : "failed") << " cells=" << r.records.size() << "\n";
            return r.all_converged ? 0 : 1;
        }
        SweepResult r = sweep(cfg, out);
        return r.all_converged ? 0 : 1;
    } catch (const std::exception& e) {
        err << "sweep failed: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
    std::size_t trees = 100;
    std::size_t n_min = 2;
    std::size_t n_max = 20;
    std::size_t internal_max = 10;
    std::size_t exhaustive_max = 12;  // witness-disjunction bound (quartic scan)
    std::uint64_t seed = 1;
};

struct VerifySuiteResult {
    std::size_t trees = 0;
    std::size_t checks = 0;
    std::size_t failures = 0;
};

inline std::string echo_verify(const VerifyArgs& a) {
    return "verify --trees " + std::to_string(a.trees) + " --n-min " + std::to_string(a.n_min) + " --n-max " +
           std::to_string(a.n_max) + " --internal-max " + std::to_string(a.internal_max) + " --exhaustive-max " +
           std::to_string(a.exhaustive_max) + " --seed " + std::to_string(a.seed);
}

/// Generate trees across the configured size range and hold every metric to
/// the three structural checks the protocol's correctness leans on.
inline VerifySuiteResult verify_suite(const VerifyArgs& args, std::ostream& out) {
    VerifySuiteResult result;
    out << "# cmd: " << echo_verify(args) << "\n";
    SimRng rng = seeded_rng(mix_seed(args.seed, 0xef));
    for (std::size_t i = 0; i < args.trees; ++i) {
        std::size_t n = uniform_int(rng, static_cast<std::int64_t>(args.n_min), static_cast<std::int64_t>(args.n_max));
        std::size_t internal = uniform_below(rng, args.internal_max + 1);
        std::uint64_t tree_seed = mix_seed(args.seed, i + 1);
        WeightedTree tree = generate_random_tree(n, internal, 1, 1000000, tree_seed);
        TreeMetric metric(tree);
        ++result.trees;

        VerifyReport eq = verify_relative_neighbor_mst_equivalence(metric);
        VerifyReport mono = verify_mst_path_monotonicity(metric);
        result.checks += eq.checked + mono.checked;
        for (const VerifyReport* rep : {&eq, &mono})
            if (!rep->passed()) {
                result.failures += rep->failures.size();
                out << "tree seed=" << tree_seed << " n=" << n << " " << rep->to_string();
            }
        if (n <= args.exhaustive_max) {
            WitnessCheckReport dis = verify_witness_disjunction(metric);
            result.checks += dis.cases_checked;
            if (!dis.passed()) {
                result.failures += dis.failures.size();
                out << "tree seed=" << tree_seed << " n=" << n << " check=witness-disjunction failures="
                    << dis.failures.size() << "\n";
            }
        }
    }
    out << "verify trees=" << result.trees << " checks=" << result.checks << " failures=" << result.failures
        << "\n";
    return result;
}

inline int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    try {
        VerifySuiteResult r = verify_suite(args, out);
        return r.failures == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        err << "verify failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace treemst

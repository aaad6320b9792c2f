#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treemst/treemst.hpp"

namespace {

bool parse_on_off(const std::string& s) {
    if (s == "on") return true;
    if (s == "off") return false;
    throw CLI::ValidationError("--assert", "expected 'on' or 'off'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation harness for the tree-metric overlay maintenance protocol"};
    app.require_subcommand(1);

    treemst::GenTreeArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen-tree", "generate a random weighted underlay tree");
    cmd_gen->add_option("--overlay", gen.n_overlay, "overlay node count");
    cmd_gen->add_option("--internal", gen.n_internal, "internal (non-overlay) node count");
    cmd_gen->add_option("--weight-lo", gen.weight_lo, "minimum edge weight");
    cmd_gen->add_option("--weight-hi", gen.weight_hi, "maximum edge weight");
    cmd_gen->add_option("--seed", gen.seed, "generation seed");
    cmd_gen->add_option("--out,-o", gen.out_path, "tree file path (default stdout)");

    treemst::RunArgs runa;
    std::string assert_flag = "on";
    CLI::App* cmd_r = app.add_subcommand("run", "run one simulation to convergence or budget");
    cmd_r->add_option("--tree", runa.tree_path, "underlay tree file")->required();
    cmd_r->add_option("--seed", runa.seed, "seed for initial configuration and scheduler");
    cmd_r->add_option("--scheduler", runa.scheduler, "rr | random | adversarial");
    cmd_r->add_option("--fairness-horizon", runa.fairness_horizon, "weak-fairness window (0 = 4N)");
    cmd_r->add_option("--initial", runa.initial, "line | star | random | disconnected | long-edges");
    cmd_r->add_option("--budget-mult", runa.budget_mult, "step budget = mult * N^2");
    cmd_r->add_option("--assert", assert_flag, "per-step invariant checks: on | off");
    cmd_r->add_option("--out", runa.out_path, "trace file path (default stdout)");

    treemst::ExperimentConfig sweep;
    CLI::App* cmd_s = app.add_subcommand("sweep", "run a (n x seed) grid and aggregate");
    cmd_s->add_option("--n", sweep.n_values, "overlay sizes")->delimiter(',');
    cmd_s->add_option("--seeds", sweep.seeds_per_n, "seeds per size");
    cmd_s->add_option("--scheduler", sweep.scheduler, "rr | random | adversarial");
    cmd_s->add_option("--fairness-horizon", sweep.fairness_horizon, "weak-fairness window (0 = 4N)");
    cmd_s->add_option("--initial", sweep.initial, "line | star | random | disconnected | long-edges");
    cmd_s->add_option("--budget-mult", sweep.budget_mult, "step budget = mult * N^2");
    cmd_s->add_option("--seed", sweep.base_seed, "base seed");
    cmd_s->add_flag("--parallel", sweep.parallel, "run cells on all cores (records stay ordered)");
    cmd_s->add_option("--out", sweep.out_path, "result file path (default stdout)");

    treemst::VerifyArgs ver;
    CLI::App* cmd_v = app.add_subcommand("verify", "brute-force the structural oracle checks");
    cmd_v->add_option("--trees", ver.trees, "number of random trees");
    cmd_v->add_option("--n-min", ver.n_min, "minimum overlay size");
    cmd_v->add_option("--n-max", ver.n_max, "maximum overlay size");
    cmd_v->add_option("--internal-max", ver.internal_max, "maximum internal node count");
    cmd_v->add_option("--exhaustive-max", ver.exhaustive_max, "witness-disjunction size bound");
    cmd_v->add_option("--seed", ver.seed, "suite seed");

    CLI11_PARSE(app, argc, argv);

    if (cmd_gen->parsed()) return treemst::cmd_gen_tree(gen, std::cout, std::cerr);
    if (cmd_r->parsed()) {
        runa.assertions = parse_on_off(assert_flag);
        return treemst::cmd_run(runa, std::cout, std::cerr);
    }
    if (cmd_s->parsed()) return treemst::cmd_sweep(sweep, std::cout, std::cerr);
    if (cmd_v->parsed()) return treemst::cmd_verify(ver, std::cout, std::cerr);
    return 1;
}

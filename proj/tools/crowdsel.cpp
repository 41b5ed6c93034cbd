// crowdsel command line tool.
//
// Subcommands:
//   simulate     write a synthetic answer matrix in the canonical format
//   select       estimate reliabilities from control items and pick a worker set
//   aggregate    aggregate labels with mv / wmv_linear / wmv_log / em
//   bound        print F(S) and the WMV-linear error upper bound
//   experiment   run the full trial protocol and write a CSV report + manifest
//   import       convert a triple-list dataset (e.g. bluebird) to the canonical format
//
// Exit code 0 on success; on failure a single machine-parsable line
// "crowdsel: error: <message>" goes to stderr and the exit code is 1.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdsel/bounds.hpp"
#include "crowdsel/harness.hpp"
#include "crowdsel/manifest.hpp"
#include "crowdsel/matrix_io.hpp"
#include "crowdsel/version.hpp"

namespace {

using namespace crowdsel;

// "3..31" or "3,5,9..12" -> {3,...,31} / {3,5,9,10,11,12}
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(std::stoi(part));
        } else {
            const int lo = std::stoi(part.substr(0, dots));
            const int hi = std::stoi(part.substr(dots + 2));
            if (hi < lo) throw std::invalid_argument("bad range '" + part + "'");
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        }
    }
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) out.push_back(std::stod(part));
    }
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

std::vector<double> read_double_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (out.empty()) throw std::runtime_error(path.string() + ": no values found");
    return out;
}

std::vector<WorkerStats> stats_from_matrix(const LabelMatrix& matrix, int n_control,
                                           std::uint64_t seed) {
    if (!matrix.has_truths())
        throw std::runtime_error("dataset has no ground truth; cannot pick control items");
    if (n_control < 2 || n_control >= matrix.num_items())
        throw std::runtime_error("n-control must lie in [2, N-1]");
    Rng rng(mix_seed(seed, stream::controls));
    const std::vector<int> controls =
        rng.sample_without_replacement(matrix.num_items(), n_control);
    std::vector<WorkerStats> stats;
    for (int w = 1; w <= matrix.num_workers(); ++w) {
        int answered = 0, correct = 0;
        for (const int j : controls) {
            const int z = matrix.label(w, j);
            if (z == 0) continue;
            ++answered;
            if (z == matrix.truth(j)) ++correct;
        }
        if (answered >= 2)
            stats.push_back(make_worker_stats(w, correct, answered, matrix.num_classes()));
    }
    if (stats.empty()) throw std::runtime_error("no worker answered at least 2 control items");
    return stats;
}

int cmd_simulate(const SimConfig& sim, const std::string& out_path) {
    const SimData data = simulate_dataset(sim);
    write_matrix(out_path, data.matrix);
    std::cout << "wrote " << out_path << " (" << sim.num_workers << " workers, " << sim.num_items
              << " items, " << sim.num_classes << " classes)\n";
    return 0;
}

int cmd_select(const std::string& in_path, const std::string& scores_text, int budget,
               int n_control, std::uint64_t seed, const std::string& estimator) {
    std::vector<double> x;
    std::vector<int> pool_ids;
    if (!scores_text.empty()) {
        x = parse_double_list(scores_text);
        pool_ids.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) pool_ids[i] = static_cast<int>(i) + 1;
    } else {
        const LabelMatrix matrix = load_matrix(in_path);
        const std::vector<WorkerStats> stats = stats_from_matrix(matrix, n_control, seed);
        for (const WorkerStats& s : stats) {
            pool_ids.push_back(s.worker);
            if (estimator == "plugin") {
                const double d = matrix.num_classes() * s.w_hat - 1.0;
                x.push_back(d * d);
            } else {
                x.push_back(s.g_score);
            }
        }
    }

    const SelectionResult sel = select_workers(x, budget);
    std::cout << "selected";
    for (const int pos : sel.selected) std::cout << ' ' << pool_ids[static_cast<std::size_t>(pos - 1)];
    std::cout << "\nk_star " << sel.k_star << "\nf_hat_star " << sel.f_hat_star
              << "\nprefix_scores";
    for (const double f : sel.prefix_scores) std::cout << ' ' << f;
    std::cout << '\n';
    return 0;
}

int cmd_aggregate(const std::string& in_path, const std::string& aggregator,
                  const std::string& subset_text, const std::string& reliabilities_path,
                  int n_control, std::uint64_t seed, double clamp_eps,
                  const std::string& em_init, const std::string& out_path) {
    const LabelMatrix matrix = load_matrix(in_path);
    const int m = matrix.num_workers();
    const int l = matrix.num_classes();

    std::vector<int> subset;
    if (subset_text.empty()) {
        subset.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) subset[static_cast<std::size_t>(i)] = i + 1;
    } else {
        subset = parse_int_list(subset_text);
    }

    std::vector<double> w_hats(static_cast<std::size_t>(m), 1.0 / static_cast<double>(l));
    bool have_w = false;
    if (!reliabilities_path.empty()) {
        w_hats = read_double_file(reliabilities_path);
        if (w_hats.size() != static_cast<std::size_t>(m))
            throw std::runtime_error("reliabilities file must hold one value per worker");
        have_w = true;
    } else if (n_control > 0) {
        for (const WorkerStats& s : stats_from_matrix(matrix, n_control, seed))
            w_hats[static_cast<std::size_t>(s.worker - 1)] = s.w_hat;
        have_w = true;
    }

    AggregationOutput out;
    if (aggregator == "mv") {
        out = aggregate_majority(matrix, subset);
    } else if (aggregator == "wmv_linear" || aggregator == "wmv_log") {
        if (!have_w)
            throw std::runtime_error(aggregator +
                                     " needs --reliabilities or --n-control to weight workers");
        const double eps = clamp_eps > 0.0
                               ? clamp_eps
                               : (n_control > 1 ? 1.0 / (2.0 * n_control) : 0.05);
        const WeightVector weights = aggregator == "wmv_linear"
                                         ? linear_weights(w_hats, l)
                                         : log_weights(w_hats, l, eps);
        out = aggregate_wmv(matrix, weights, subset);
    } else if (aggregator == "em") {
        std::vector<double> init = w_hats;
        if (em_init == "mv" || !have_w)
            init = detail::em_init_from_subset_mv(matrix, subset, w_hats);
        for (double& w : init) w = std::clamp(w, 1e-4, 1.0 - 1e-4);
        out = em_one_coin(matrix, init, subset).output;
    } else {
        throw std::runtime_error("unknown aggregator '" + aggregator + "'");
    }

    std::ostringstream lines;
    for (std::size_t j = 0; j < out.predicted.size(); ++j)
        lines << (j + 1) << ' ' << out.predicted[j] << '\n';
    if (out_path.empty())
        std::cout << lines.str();
    else
        write_file(out_path, lines.str());

    if (matrix.has_truths()) {
        std::vector<int> all(out.predicted.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i) + 1;
        std::cout << "accuracy " << accuracy(out.predicted, matrix.truths(), all) << " ties "
                  << out.tie_count << '\n';
    }
    return 0;
}

int cmd_bound(const std::string& w_text, const std::string& w_file, int num_classes) {
    std::vector<double> w;
    if (!w_text.empty())
        w = parse_double_list(w_text);
    else if (!w_file.empty())
        w = read_double_file(w_file);
    else
        throw std::runtime_error("bound needs --w or --w-file");
    std::cout << "F " << f_true(w, num_classes).value << '\n'
              << "bound " << error_upper_bound(w, num_classes) << '\n';
    return 0;
}

int cmd_experiment(ExperimentConfig cfg, const std::vector<int>& n_controls,
                   const std::vector<double>& beta_as, const std::string& out_path) {
    const bool sweep = n_controls.size() > 1 || beta_as.size() > 1;
    const std::filesystem::path out(out_path);
    std::vector<std::string> outputs;

    for (const int n : n_controls) {
        for (const double a : beta_as) {
            ExperimentConfig run_cfg = cfg;
            run_cfg.n_control = n;
            if (run_cfg.sim) run_cfg.sim->beta_a = a;

            std::filesystem::path csv_path = out;
            if (sweep) {
                std::ostringstream suffix;
                suffix << out.stem().string() << "_n" << n;
                if (run_cfg.sim) suffix << "_a" << a;
                csv_path = out.parent_path() / (suffix.str() + out.extension().string());
            }

            const ExperimentResult result = run_experiment(run_cfg);
            write_file(csv_path, summaries_to_csv(result.summaries));
            outputs.push_back(csv_path.string());
            std::cout << "wrote " << csv_path.string() << " (" << result.summaries.size()
                      << " rows, " << run_cfg.trials << " trials)\n";
        }
    }

    const std::filesystem::path manifest_path =
        out.parent_path() / (out.stem().string() + ".manifest.json");
    cfg.n_control = n_controls.front();
    if (cfg.sim) cfg.sim->beta_a = beta_as.front();
    write_manifest(manifest_path, cfg, outputs);
    std::cout << "wrote " << manifest_path.string() << '\n';
    return 0;
}

int cmd_import(const std::string& labels_path, const std::string& truths_path,
               const std::string& order, const std::string& out_path) {
    const TripleOrder triple_order =
        order == "wil" ? TripleOrder::worker_item_label : TripleOrder::item_worker_label;
    const ImportedDataset ds = import_triples(labels_path, truths_path, triple_order);
    write_matrix(out_path, ds.matrix);

    nlohmann::json dict;
    dict["workers"] = ds.worker_ids;
    dict["items"] = ds.item_ids;
    dict["labels"] = ds.label_names;
    const std::filesystem::path dict_path = std::filesystem::path(out_path).string() + ".dict.json";
    write_file(dict_path, dict.dump(2) + "\n");

    std::cout << "imported " << ds.matrix.num_workers() << " workers, " << ds.matrix.num_items()
              << " items, " << ds.matrix.num_classes() << " classes -> " << out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budgeted crowd worker selection and label aggregation"};
    app.set_version_flag("--version", std::string("crowdsel ") + crowdsel::kVersion);
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    SimConfig sim;
    std::string sim_out = "matrix.txt";
    sim_cmd->add_option("--workers", sim.num_workers, "Worker count")->required();
    sim_cmd->add_option("--items", sim.num_items, "Item count")->required();
    sim_cmd->add_option("--classes", sim.num_classes, "Label classes (>= 2)");
    sim_cmd->add_option("--beta-a", sim.beta_a, "Reliability prior Beta a");
    sim_cmd->add_option("--beta-b", sim.beta_b, "Reliability prior Beta b");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--out", sim_out, "Output matrix file");

    // select
    auto* sel_cmd = app.add_subcommand("select", "Pick a worker set under a budget");
    std::string sel_in, sel_scores, sel_estimator = "unbiased";
    int sel_budget = 0, sel_n_control = 10;
    std::uint64_t sel_seed = 0;
    sel_cmd->add_option("--in", sel_in, "Canonical matrix file (with truths)");
    sel_cmd->add_option("--scores", sel_scores, "Comma-separated x scores (skips estimation)");
    sel_cmd->add_option("--budget", sel_budget, "Budget K")->required();
    sel_cmd->add_option("--n-control", sel_n_control, "Control items to sample");
    sel_cmd->add_option("--seed", sel_seed, "RNG seed for the control draw");
    sel_cmd->add_option("--estimator", sel_estimator, "unbiased|plugin")
        ->check(CLI::IsMember({"unbiased", "plugin"}));

    // aggregate
    auto* agg_cmd = app.add_subcommand("aggregate", "Aggregate labels");
    std::string agg_in, agg_name = "mv", agg_subset, agg_rel, agg_em_init = "control", agg_out;
    int agg_n_control = 0;
    std::uint64_t agg_seed = 0;
    double agg_clamp = 0.0;
    agg_cmd->add_option("--in", agg_in, "Canonical matrix file")->required();
    agg_cmd->add_option("--aggregator", agg_name, "mv|wmv_linear|wmv_log|em")
        ->check(CLI::IsMember({"mv", "wmv_linear", "wmv_log", "em"}));
    agg_cmd->add_option("--subset", agg_subset, "Worker ids, e.g. 1,3,7..9 (default: all)");
    agg_cmd->add_option("--reliabilities", agg_rel, "File with one w_hat per worker");
    agg_cmd->add_option("--n-control", agg_n_control,
                        "Estimate reliabilities from this many sampled control items");
    agg_cmd->add_option("--seed", agg_seed, "RNG seed for the control draw");
    agg_cmd->add_option("--clamp-eps", agg_clamp, "Truncation for log-odds weights");
    agg_cmd->add_option("--em-init", agg_em_init, "control|mv")
        ->check(CLI::IsMember({"control", "mv"}));
    agg_cmd->add_option("--out", agg_out, "Write 'item label' predictions here");

    // bound
    auto* bound_cmd = app.add_subcommand("bound", "Error upper bound for a worker set");
    std::string bound_w, bound_w_file;
    int bound_classes = 2;
    bound_cmd->add_option("--w", bound_w, "Comma-separated true reliabilities");
    bound_cmd->add_option("--w-file", bound_w_file, "File with one reliability per line");
    bound_cmd->add_option("--classes", bound_classes, "Label classes");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run the trial protocol, write CSV");
    ExperimentConfig cfg;
    SimConfig exp_sim{31, 1000, 2, 2.3, 2.0, 0};
    std::string exp_in, exp_budgets = "3..31", exp_strategies = "select_unbiased,top_k",
                exp_aggregators = "wmv_linear", exp_out = "report.csv",
                exp_n_control = "10", exp_beta_a, exp_em_init = "control";
    exp_cmd->add_option("--in", exp_in, "Dataset file (canonical format)");
    exp_cmd->add_option("--workers", exp_sim.num_workers, "Simulated worker count");
    exp_cmd->add_option("--items", exp_sim.num_items, "Simulated item count");
    exp_cmd->add_option("--classes", exp_sim.num_classes, "Simulated label classes");
    exp_cmd->add_option("--beta-a", exp_beta_a, "Beta prior a (comma list sweeps)");
    exp_cmd->add_option("--beta-b", exp_sim.beta_b, "Beta prior b");
    exp_cmd->add_option("--budgets", exp_budgets, "Budget sweep, e.g. 3..31");
    exp_cmd->add_option("--trials", cfg.trials, "Trials to average over");
    exp_cmd->add_option("--n-control", exp_n_control, "Control items (comma list sweeps)");
    exp_cmd->add_option("--strategies", exp_strategies,
                        "Comma list of select_unbiased,select_plugin,top_k,random_k");
    exp_cmd->add_option("--aggregators", exp_aggregators, "Comma list of mv,wmv_linear,wmv_log,em");
    exp_cmd->add_option("--seed", cfg.master_seed, "Master seed");
    exp_cmd->add_option("--out", exp_out, "Report CSV path");
    exp_cmd->add_flag("--eval-include-controls", cfg.eval_include_controls,
                      "Score accuracy on control items too");
    exp_cmd->add_flag("--em-clamp-controls", cfg.em_clamp_controls,
                      "Pin control posteriors during EM (needs --eval-include-controls)");
    exp_cmd->add_option("--em-init", exp_em_init, "control|mv")
        ->check(CLI::IsMember({"control", "mv"}));
    exp_cmd->add_option("--clamp-eps", cfg.log_clamp_eps, "Truncation for log-odds weights");

    // import
    auto* imp_cmd = app.add_subcommand("import", "Convert a triple-list dataset");
    std::string imp_labels, imp_truths, imp_order = "iwl", imp_out = "dataset.txt";
    imp_cmd->add_option("--labels", imp_labels, "Triples file")->required();
    imp_cmd->add_option("--truths", imp_truths, "Item truth file")->required();
    imp_cmd->add_option("--order", imp_order, "Triple order: iwl (item worker label) or wil")
        ->check(CLI::IsMember({"iwl", "wil"}));
    imp_cmd->add_option("--out", imp_out, "Canonical output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) return cmd_simulate(sim, sim_out);
        if (sel_cmd->parsed())
            return cmd_select(sel_in, sel_scores, sel_budget, sel_n_control, sel_seed,
                              sel_estimator);
        if (agg_cmd->parsed())
            return cmd_aggregate(agg_in, agg_name, agg_subset, agg_rel, agg_n_control, agg_seed,
                                 agg_clamp, agg_em_init, agg_out);
        if (bound_cmd->parsed()) return cmd_bound(bound_w, bound_w_file, bound_classes);
        if (exp_cmd->parsed()) {
            cfg.budgets = parse_int_list(exp_budgets);
            cfg.strategies.clear();
            {
                std::stringstream ss(exp_strategies);
                std::string part;
                while (std::getline(ss, part, ','))
                    if (!part.empty()) cfg.strategies.push_back(parse_strategy(part));
            }
            cfg.aggregators.clear();
            {
                std::stringstream ss(exp_aggregators);
                std::string part;
                while (std::getline(ss, part, ','))
                    if (!part.empty()) cfg.aggregators.push_back(parse_aggregator(part));
            }
            cfg.em_init = exp_em_init == "mv" ? EmInit::majority_vote : EmInit::control;
            std::vector<double> beta_as = {exp_sim.beta_a};
            if (!exp_in.empty()) {
                cfg.dataset_path = exp_in;
            } else {
                cfg.sim = exp_sim;
                if (!exp_beta_a.empty()) beta_as = parse_double_list(exp_beta_a);
            }
            return cmd_experiment(cfg, parse_int_list(exp_n_control), beta_as, exp_out);
        }
        if (imp_cmd->parsed()) return cmd_import(imp_labels, imp_truths, imp_order, imp_out);
    } catch (const std::exception& e) {
        std::cerr << "crowdsel: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

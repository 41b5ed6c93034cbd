#pragma once
// Experiment protocol: per-trial control sampling, reliability estimation,
// the strategy x aggregator x budget grid, and trial averaging.
//
// One trial: (1) draw n_control control items uniformly without
// replacement; (2) estimate each worker's reliability from their answers
// on the controls; (3) build a worker set per (strategy, budget); (4) run
// each aggregator on the evaluation items (everything except controls,
// unless eval_include_controls); (5) score accuracy against the truths.
//
// Seed discipline: trial_seed = mix_seed(master_seed, kTrialStream,
// trial_index), so extending the trial count never changes earlier
// trials. Control sampling, per-trial simulation, and each strategy's
// randomness consume their own substreams of the trial seed. With a
// simulated source every trial generates a fresh dataset; with a dataset
// source only the control draw varies across trials.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crowdsel/aggregation.hpp"
#include "crowdsel/estimation.hpp"
#include "crowdsel/matrix_io.hpp"
#include "crowdsel/model.hpp"
#include "crowdsel/selection.hpp"
#include "crowdsel/simulate.hpp"

namespace crowdsel {

enum class Strategy { select_unbiased, select_plugin, top_k, random_k };
enum class Aggregator { mv, wmv_linear, wmv_log, em };
enum class EmInit { control, majority_vote };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::select_unbiased: return "select_unbiased";
        case Strategy::select_plugin: return "select_plugin";
        case Strategy::top_k: return "top_k";
        case Strategy::random_k: return "random_k";
    }
    return "?";
}

inline const char* to_string(Aggregator a) {
    switch (a) {
        case Aggregator::mv: return "mv";
        case Aggregator::wmv_linear: return "wmv_linear";
        case Aggregator::wmv_log: return "wmv_log";
        case Aggregator::em: return "em";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view name) {
    if (name == "select_unbiased") return Strategy::select_unbiased;
    if (name == "select_plugin") return Strategy::select_plugin;
    if (name == "top_k") return Strategy::top_k;
    if (name == "random_k") return Strategy::random_k;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

inline Aggregator parse_aggregator(std::string_view name) {
    if (name == "mv") return Aggregator::mv;
    if (name == "wmv_linear") return Aggregator::wmv_linear;
    if (name == "wmv_log") return Aggregator::wmv_log;
    if (name == "em") return Aggregator::em;
    throw std::invalid_argument("unknown aggregator '" + std::string(name) + "'");
}

struct ExperimentConfig {
    std::optional<SimConfig> sim;                      // simulated source
    std::optional<std::filesystem::path> dataset_path; // or a canonical file
    int n_control = 10;
    std::vector<int> budgets;
    int trials = 100;
    std::vector<Strategy> strategies = {Strategy::select_unbiased};
    std::vector<Aggregator> aggregators = {Aggregator::wmv_linear};
    std::uint64_t master_seed = 0;
    bool eval_include_controls = false;
    EmInit em_init = EmInit::control;
    bool em_clamp_controls = false; // pin control posteriors when controls are aggregated
    double log_clamp_eps = 0.0;     // 0 -> default 1/(2 n_control)
    int em_max_iter = 100;
    double em_tol = 1e-6;
};

struct TrialReport {
    int trial = 0;
    Strategy strategy = Strategy::select_unbiased;
    Aggregator aggregator = Aggregator::wmv_linear;
    int budget = 0;
    std::vector<int> selected;
    int workers_used = 0;
    double accuracy = 0.0;
    int tie_count = 0;
    std::uint64_t seed = 0;
    bool skipped = false;
    std::string note;
};

struct ExperimentSummary {
    Strategy strategy;
    Aggregator aggregator;
    int budget = 0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double mean_workers_used = 0.0;
    int trials = 0;
};

struct ExperimentResult {
    std::vector<TrialReport> reports;
    std::vector<ExperimentSummary> summaries;
};

namespace stream {
inline constexpr std::uint64_t trial = 17;
inline constexpr std::uint64_t controls = 18;
inline constexpr std::uint64_t trial_sim = 19;
inline constexpr std::uint64_t strategy_draw = 20;
} // namespace stream

inline void validate_config(const ExperimentConfig& cfg, int num_workers, int num_items) {
    if (cfg.n_control < 2) throw std::invalid_argument("config: n_control must be at least 2");
    if (cfg.n_control >= num_items)
        throw std::invalid_argument("config: n_control must be smaller than the item count");
    if (cfg.budgets.empty()) throw std::invalid_argument("config: no budgets given");
    for (const int k : cfg.budgets)
        if (k < 1 || k > num_workers)
            throw std::invalid_argument("config: budget " + std::to_string(k) +
                                        " outside [1, M]");
    if (cfg.trials < 1) throw std::invalid_argument("config: trials must be at least 1");
    if (cfg.strategies.empty()) throw std::invalid_argument("config: no strategies given");
    if (cfg.aggregators.empty()) throw std::invalid_argument("config: no aggregators given");
}

namespace detail {

// Reliability stats from the control answers. Workers with fewer than two
// answered controls cannot be scored and are left out of the pool.
inline std::vector<WorkerStats> control_stats(const LabelMatrix& data,
                                              std::span<const int> control_items) {
    std::vector<WorkerStats> stats;
    for (int w = 1; w <= data.num_workers(); ++w) {
        int answered = 0, correct = 0;
        for (const int j : control_items) {
            const int z = data.label(w, j);
            if (z == 0) continue;
            ++answered;
            if (z == data.truth(j)) ++correct;
        }
        if (answered >= 2)
            stats.push_back(make_worker_stats(w, correct, answered, data.num_classes()));
    }
    return stats;
}

// Restriction of `data` to the given items (ascending original order).
inline LabelMatrix item_submatrix(const LabelMatrix& data, std::span<const int> items) {
    std::vector<AnswerRecord> records;
    std::vector<int> truths;
    truths.reserve(items.size());
    int new_j = 0;
    for (const int j : items) {
        ++new_j;
        truths.push_back(data.truth(j));
        for (int w = 1; w <= data.num_workers(); ++w)
            if (const int z = data.label(w, j); z != 0) records.push_back({w, new_j, z});
    }
    return build_label_matrix(records, data.num_workers(), static_cast<int>(items.size()),
                              data.num_classes(), std::move(truths));
}

inline std::vector<double> em_init_from_subset_mv(const LabelMatrix& eval, std::span<const int> subset,
                                                  std::span<const double> fallback) {
    const AggregationOutput mv = aggregate_majority(eval, subset);
    std::vector<double> init(fallback.begin(), fallback.end());
    for (const int w : subset) {
        int answered = 0, agree = 0;
        for (int j = 1; j <= eval.num_items(); ++j) {
            const int z = eval.label(w, j);
            if (z == 0) continue;
            ++answered;
            if (z == mv.predicted[static_cast<std::size_t>(j - 1)]) ++agree;
        }
        if (answered > 0)
            init[static_cast<std::size_t>(w - 1)] =
                static_cast<double>(agree) / static_cast<double>(answered);
    }
    return init;
}

} // namespace detail

inline std::vector<TrialReport> run_trial(const ExperimentConfig& cfg, const LabelMatrix& data,
                                          std::uint64_t trial_seed, int trial_index) {
    validate_config(cfg, data.num_workers(), data.num_items());
    if (!data.has_truths()) throw std::invalid_argument("run_trial: dataset has no ground truth");

    const int m = data.num_workers();
    const int l = data.num_classes();

    // (1) control items
    Rng control_rng(mix_seed(trial_seed, stream::controls));
    std::vector<int> control_items =
        control_rng.sample_without_replacement(data.num_items(), cfg.n_control);
    std::vector<bool> is_control(static_cast<std::size_t>(data.num_items()) + 1, false);
    for (const int j : control_items) is_control[static_cast<std::size_t>(j)] = true;

    // (2) per-worker reliability estimates
    const std::vector<WorkerStats> stats = detail::control_stats(data, control_items);

    std::vector<double> w_hat_full(static_cast<std::size_t>(m), 1.0 / static_cast<double>(l));
    for (const WorkerStats& s : stats) w_hat_full[static_cast<std::size_t>(s.worker - 1)] = s.w_hat;

    // evaluation view
    std::vector<int> eval_items;
    for (int j = 1; j <= data.num_items(); ++j)
        if (cfg.eval_include_controls || !is_control[static_cast<std::size_t>(j)])
            eval_items.push_back(j);
    const LabelMatrix eval = detail::item_submatrix(data, eval_items);
    std::vector<int> eval_all(eval_items.size());
    for (std::size_t i = 0; i < eval_all.size(); ++i) eval_all[i] = static_cast<int>(i) + 1;

    EmOptions em_opts;
    em_opts.max_iter = cfg.em_max_iter;
    em_opts.tol = cfg.em_tol;
    if (cfg.eval_include_controls && cfg.em_clamp_controls) {
        // control item j maps to its rank among eval items
        for (std::size_t i = 0; i < eval_items.size(); ++i)
            if (is_control[static_cast<std::size_t>(eval_items[i])])
                em_opts.clamp_items.emplace_back(static_cast<int>(i) + 1,
                                                 data.truth(eval_items[i]));
    }

    const double log_eps =
        cfg.log_clamp_eps > 0.0 ? cfg.log_clamp_eps : 1.0 / (2.0 * static_cast<double>(cfg.n_control));
    const WeightVector lin_weights = linear_weights(w_hat_full, l);
    const WeightVector lo_weights = log_weights(w_hat_full, l, log_eps);

    std::vector<double> x_unbiased(stats.size()), x_plugin(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
        x_unbiased[i] = stats[i].g_score;
        const double d = static_cast<double>(l) * stats[i].w_hat - 1.0;
        x_plugin[i] = d * d;
    }

    // aggregation cache: identical subsets recur across budgets
    std::map<std::pair<Aggregator, std::vector<int>>, std::pair<double, int>> cache;
    const auto aggregate = [&](Aggregator agg, const std::vector<int>& subset) {
        const auto key = std::make_pair(agg, subset);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
        AggregationOutput out;
        switch (agg) {
            case Aggregator::mv: out = aggregate_majority(eval, subset); break;
            case Aggregator::wmv_linear: out = aggregate_wmv(eval, lin_weights, subset); break;
            case Aggregator::wmv_log: out = aggregate_wmv(eval, lo_weights, subset); break;
            case Aggregator::em: {
                std::vector<double> init = w_hat_full;
                if (cfg.em_init == EmInit::majority_vote)
                    init = detail::em_init_from_subset_mv(eval, subset, w_hat_full);
                for (double& w : init) w = std::clamp(w, 1e-4, 1.0 - 1e-4);
                out = em_one_coin(eval, init, subset, em_opts).output;
                break;
            }
        }
        const double acc = accuracy(out.predicted, eval.truths(), eval_all);
        const auto value = std::make_pair(acc, out.tie_count);
        cache.emplace(key, value);
        return value;
    };

    std::vector<TrialReport> reports;
    for (const int budget : cfg.budgets) {
        for (const Strategy strategy : cfg.strategies) {
            std::vector<int> subset;
            switch (strategy) {
                case Strategy::select_unbiased:
                case Strategy::select_plugin: {
                    const auto& x =
                        strategy == Strategy::select_unbiased ? x_unbiased : x_plugin;
                    if (!x.empty()) {
                        const SelectionResult sel = select_workers(x, budget);
                        for (const int pos : sel.selected)
                            subset.push_back(stats[static_cast<std::size_t>(pos - 1)].worker);
                    }
                    break;
                }
                case Strategy::top_k:
                    subset = top_k(stats, budget);
                    break;
                case Strategy::random_k:
                    subset = random_k(
                        m, budget,
                        mix_seed(trial_seed, stream::strategy_draw,
                                 static_cast<std::uint64_t>(strategy) + 1,
                                 static_cast<std::uint64_t>(budget)));
                    break;
            }

            for (const Aggregator agg : cfg.aggregators) {
                TrialReport r;
                r.trial = trial_index;
                r.strategy = strategy;
                r.aggregator = agg;
                r.budget = budget;
                r.selected = subset;
                r.workers_used = static_cast<int>(subset.size());
                r.seed = trial_seed;
                if (subset.empty()) {
                    r.skipped = true;
                    r.note = "empty worker set";
                } else {
                    const auto [acc, ties] = aggregate(agg, subset);
                    r.accuracy = acc;
                    r.tie_count = ties;
                }
                reports.push_back(std::move(r));
            }
        }
    }
    return reports;
}

// Mean/std per (strategy, aggregator, budget); trial order does not
// matter because values are reduced in trial-index order.
inline std::vector<ExperimentSummary> summarize(std::vector<TrialReport> reports) {
    std::sort(reports.begin(), reports.end(), [](const TrialReport& a, const TrialReport& b) {
        if (a.strategy != b.strategy) return a.strategy < b.strategy;
        if (a.aggregator != b.aggregator) return a.aggregator < b.aggregator;
        if (a.budget != b.budget) return a.budget < b.budget;
        return a.trial < b.trial;
    });

    std::vector<ExperimentSummary> out;
    std::size_t i = 0;
    while (i < reports.size()) {
        std::size_t j = i;
        double acc_sum = 0.0, used_sum = 0.0;
        int count = 0;
        while (j < reports.size() && reports[j].strategy == reports[i].strategy &&
               reports[j].aggregator == reports[i].aggregator &&
               reports[j].budget == reports[i].budget) {
            if (!reports[j].skipped) {
                acc_sum += reports[j].accuracy;
                used_sum += static_cast<double>(reports[j].workers_used);
                ++count;
            }
            ++j;
        }
        ExperimentSummary s;
        s.strategy = reports[i].strategy;
        s.aggregator = reports[i].aggregator;
        s.budget = reports[i].budget;
        s.trials = count;
        if (count > 0) {
            s.mean_acc = acc_sum / count;
            s.mean_workers_used = used_sum / count;
            if (count > 1) {
                double ss = 0.0;
                for (std::size_t k = i; k < j; ++k)
                    if (!reports[k].skipped) {
                        const double d = reports[k].accuracy - s.mean_acc;
                        ss += d * d;
                    }
                s.std_acc = std::sqrt(ss / (count - 1));
            }
        }
        out.push_back(s);
        i = j;
    }
    return out;
}

inline ExperimentResult run_experiment_with_data(const ExperimentConfig& cfg,
                                                 const LabelMatrix& data) {
    validate_config(cfg, data.num_workers(), data.num_items());
    ExperimentResult result;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t trial_seed =
            mix_seed(cfg.master_seed, stream::trial, static_cast<std::uint64_t>(t));
        auto reports = run_trial(cfg, data, trial_seed, t);
        result.reports.insert(result.reports.end(), reports.begin(), reports.end());
    }
    result.summaries = summarize(result.reports);
    return result;
}

// Resolves the configured source. A simulated source draws a fresh
// dataset per trial (the per-trial seed overrides SimConfig::seed).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.sim.has_value() == cfg.dataset_path.has_value())
        throw std::invalid_argument("config: exactly one of sim/dataset source required");

    if (cfg.dataset_path) return run_experiment_with_data(cfg, load_matrix(*cfg.dataset_path));

    validate_config(cfg, cfg.sim->num_workers, cfg.sim->num_items);
    ExperimentResult result;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t trial_seed =
            mix_seed(cfg.master_seed, stream::trial, static_cast<std::uint64_t>(t));
        SimConfig sim = *cfg.sim;
        sim.seed = mix_seed(trial_seed, stream::trial_sim);
        const SimData sd = simulate_dataset(sim);
        auto reports = run_trial(cfg, sd.matrix, trial_seed, t);
        result.reports.insert(result.reports.end(), reports.begin(), reports.end());
    }
    result.summaries = summarize(result.reports);
    return result;
}

// CSV schema v1: one row per (strategy, aggregator, K).
inline std::string summaries_to_csv(std::span<const ExperimentSummary> summaries) {
    std::ostringstream out;
    out << "strategy,aggregator,K,mean_acc,std_acc,mean_workers_used,trials\n";
    out.setf(std::ios::fixed);
    for (const ExperimentSummary& s : summaries) {
        out.precision(6);
        out << to_string(s.strategy) << ',' << to_string(s.aggregator) << ',' << s.budget << ','
            << s.mean_acc << ',' << s.std_acc << ',';
        out.precision(4);
        out << s.mean_workers_used << ',' << s.trials << '\n';
    }
    return out.str();
}

inline const ExperimentSummary* find_summary(std::span<const ExperimentSummary> summaries,
                                             Strategy s, Aggregator a, int budget) {
    for (const ExperimentSummary& e : summaries)
        if (e.strategy == s && e.aggregator == a && e.budget == budget) return &e;
    return nullptr;
}

} // namespace crowdsel

#pragma once
// Machine-readable run manifest written next to every experiment CSV:
// full configuration, code version, CSV schema version, and the output
// files, so a report can always be regenerated.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdsel/harness.hpp"
#include "crowdsel/version.hpp"

namespace crowdsel {

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (cfg.sim) {
        j["source"] = {{"type", "simulated"},
                       {"workers", cfg.sim->num_workers},
                       {"items", cfg.sim->num_items},
                       {"classes", cfg.sim->num_classes},
                       {"beta_a", cfg.sim->beta_a},
                       {"beta_b", cfg.sim->beta_b}};
    } else if (cfg.dataset_path) {
        j["source"] = {{"type", "dataset"}, {"path", cfg.dataset_path->string()}};
    }
    j["n_control"] = cfg.n_control;
    j["budgets"] = cfg.budgets;
    j["trials"] = cfg.trials;
    std::vector<std::string> strategies, aggregators;
    for (const Strategy s : cfg.strategies) strategies.emplace_back(to_string(s));
    for (const Aggregator a : cfg.aggregators) aggregators.emplace_back(to_string(a));
    j["strategies"] = strategies;
    j["aggregators"] = aggregators;
    j["master_seed"] = cfg.master_seed;
    j["eval_include_controls"] = cfg.eval_include_controls;
    j["em_init"] = cfg.em_init == EmInit::control ? "control" : "majority_vote";
    j["em_clamp_controls"] = cfg.em_clamp_controls;
    j["log_clamp_eps"] =
        cfg.log_clamp_eps > 0.0 ? cfg.log_clamp_eps : 1.0 / (2.0 * cfg.n_control);
    j["em_max_iter"] = cfg.em_max_iter;
    j["em_tol"] = cfg.em_tol;
    return j;
}

inline void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg,
                           const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["tool"] = "crowdsel";
    j["version"] = kVersion;
    j["csv_schema"] = kCsvSchema;
    j["config"] = config_to_json(cfg);
    j["outputs"] = outputs;
    write_file(path, j.dump(2) + "\n");
}

} // namespace crowdsel

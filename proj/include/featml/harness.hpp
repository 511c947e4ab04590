#pragma once

// Experiment harness: solve each problem of a collection (prefilter,
// optional transfer seeding, feature search, rule learning, quality
// scoring), grow a MetaDb, and measure per-problem speedups of the seeded
// phase against the unseeded one.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/featsearch.hpp"
#include "featml/metadb.hpp"
#include "featml/transfer.hpp"

namespace featml {

enum class RunMode { Baseline, Meta };

struct RunConfig {
    std::string collection_dir;
    std::string metadb_path;
    double mi_threshold = 0.001;
    std::uint64_t fe = 1000;  // feature-selection evaluation budget
    double t = 0.1;           // transfer threshold
    int k = 5;                // neighbors consulted
    double b = 5.0;           // fitness confidence penalty
    std::uint64_t learn_evals = 10000;
    double quality_p = 2.0;
    std::uint64_t rng_seed = 0;
    RunMode mode = RunMode::Baseline;
};

struct ProblemRecord {
    std::string dataset_id;
    std::string phase;  // "baseline" or "meta"
    std::uint64_t evals = 0;  // baseline: evals_to_best; meta: evals to target, capped at fe
    std::optional<double> target;
    double achieved_fitness = 0.0;
    double learning_score = 0.0;
    std::size_t n_selected = 0;
    std::size_t n_transferred = 0;
    std::size_t n_overlap = 0;  // transferred features kept in the final set
    std::optional<double> nearest_distance;
    std::optional<double> speedup;  // meta only
    bool degenerate = false;        // empty selection, constant-model learning
};

struct ExperimentReport {
    std::vector<ProblemRecord> records;

    std::optional<double> arithmetic_mean_speedup() const;
    std::optional<double> geometric_mean_speedup() const;  // exp(mean log)
    std::optional<double> mean_achieved_fitness(const std::string& phase) const;
    std::optional<double> mean_learning_score(const std::string& phase) const;
};

struct SolveOutcome {
    ProblemRecord record;
    MetaDbEntry entry;
    SearchResult search;
};

// Solves one dataset and upserts the resulting entry into db.  In Meta mode
// the search is seeded from the transfer set of db's current entries; in
// Baseline mode the seed is empty and db is only written to.
SolveOutcome solve_problem(const Dataset& d, MetaDb& db, const RunConfig& cfg,
                           std::optional<double> target);

struct BaselineOutcome {
    ExperimentReport report;
    std::vector<double> targets;  // per-problem best fitness, arrival order
    MetaDb db;
};

struct MetaOutcome {
    ExperimentReport report;
    MetaDb db;
};

BaselineOutcome run_baseline(const DatasetCollection& collection, const RunConfig& cfg);

// Targets must have one value per dataset (throws std::invalid_argument
// otherwise).  Each problem's speedup is the unseeded evaluation count needed
// to reach its target divided by the seeded count; a seeded run that misses
// the target within cfg.fe counts the full budget.
MetaOutcome run_meta(const DatasetCollection& collection, const RunConfig& cfg,
                     const std::vector<double>& targets);

// CSV with the fixed column set, then per-phase means and, when any record
// has one, the speedup means as '#' summary lines.  Empty report writes the
// header only.
void write_report(const ExperimentReport& report, const std::string& path);

std::vector<double> load_targets(const std::string& path);  // one decimal per line
void save_targets(const std::vector<double>& targets, const std::string& path);

}  // namespace featml

#pragma once

// Stochastic hill climbing over feature sets with a widening edit-distance
// neighborhood and a hard evaluation budget.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"

namespace featml {

struct SearchConfig {
    std::uint64_t max_evals = 1000;  // M, >= 1
    int max_edit_distance = 5;       // search stops when d reaches this
    FitnessConfig fitness_cfg;
    std::uint64_t rng_seed = 0;
    std::optional<double> target;  // stop as soon as fitness >= target
};

struct SearchResult {
    FeatureSet best_set;
    double best_fitness = 0.0;
    std::uint64_t evals_used = 0;
    std::uint64_t evals_to_best = 0;  // eval count at first attainment of best
    bool target_reached = false;
    // (eval count, best fitness so far) at the seed and at each improvement.
    std::vector<std::pair<std::uint64_t, double>> trace;
};

// Up to `count` distinct sets at symmetric-difference distance exactly `d`
// from s, drawn over the given vocabulary.  When the whole neighborhood has
// at most `count` members it is enumerated; otherwise sets are sampled from
// rng with duplicate rejection (bounded attempts), so the result can be
// shorter than `count`.
std::vector<FeatureSet> neighbor_sets(const FeatureSet& s, int d, std::size_t count,
                                      const std::vector<std::string>& vocab,
                                      std::mt19937_64& rng);

// Batched hill climb: evaluates the seed, then batches of
// h = min(max(1, m/10), |F|^d, m) neighbors at edit distance d, moving to
// the best strict improver and resetting d to 1, else widening d.  Stops at
// d = max_edit_distance, an exhausted budget, or the target.  Deterministic
// given cfg.rng_seed.  Seed must be a subset of d's vocabulary.
SearchResult hillclimb(const Dataset& d, const FeatureSet& seed, const SearchConfig& cfg);

// Same climb with cfg.target required; throws std::invalid_argument when it
// is missing.
SearchResult run_with_target(const Dataset& d, const FeatureSet& seed,
                             const SearchConfig& cfg);

}  // namespace featml

#pragma once

// Budgeted rule learner over the selected features: flat AND/OR formulas of
// signed literals with an optional output negation, scored by negated
// classification error.

#include <cstdint>
#include <string>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"
#include "featml/metadb.hpp"

namespace featml {

struct Literal {
    std::string name;
    bool negated = false;

    auto operator<=>(const Literal&) const = default;
};

// A flat boolean rule: op over the literals (empty AND is true, empty OR is
// false), optionally negated as a whole.  canonicalize() sorts and dedups
// literals, normalizes the op of single-literal rules and folds the output
// negation into empty and single-literal rules, so equal functions of equal
// shape serialize equally.
struct RuleModel {
    enum class Op { And, Or };

    Op op = Op::And;
    std::vector<Literal> literals;
    bool negate_output = false;

    void canonicalize();
    bool eval(const Dataset& d, const DatasetRow& row) const;  // resolves names
    // Prefix notation: "true", "false", "f3", "(not f7)",
    // "(and f3 (not f7))", "(not (or f1 f2))".
    std::string serialize() const;
    static RuleModel parse(const std::string& text);  // inverse of serialize
    std::vector<std::string> feature_names() const;   // sorted unique

    bool operator==(const RuleModel&) const = default;
};

struct LearnConfig {
    std::uint64_t eval_budget = 10000;
    int max_literals = 4;
    int pool_size = 50;
    std::uint64_t rng_seed = 0;
};

struct LearnOutcome {
    CandidateRecord best;
    std::vector<CandidateRecord> pool;  // descending score, distinct digests
    std::uint64_t evals_used = 0;
};

// -(number of rows the model misclassifies), in [-n_rows, 0].  The model may
// only reference features inside s, and s must exist in d.
double score_model(const RuleModel& m, const Dataset& d, const FeatureSet& s);

// Stochastic hill climb over rules.  The two constant models are evaluated
// first, then all single literals, then mutated variants (sign flips,
// literal add/remove, operator swap, output negation).  Never returns a best
// worse than the better constant once both were affordable; deterministic
// given cfg.rng_seed.  Throws std::invalid_argument on an empty s.
LearnOutcome learn(const Dataset& d, const FeatureSet& s, const LearnConfig& cfg);

}  // namespace featml

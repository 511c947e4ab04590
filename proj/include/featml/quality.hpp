#pragma once

// Per-feature quality scores: the practical single-feature fitness and the
// formal influence-weighted quality computed from a learned candidate pool.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"
#include "featml/learner.hpp"
#include "featml/metadb.hpp"

namespace featml {

struct QualityConfig {
    double p = 2.0;  // score-weighting exponent, >= 0
    QualitySource source = QualitySource::MiFitness;
};

// fitness of the singleton {feature}.
double q_practical(const Dataset& d, const std::string& feature,
                   const FitnessConfig& cfg);

// Fraction of rows on which flipping the feature's value changes the model
// output.  Zero for features the model does not reference.
double influence(const RuleModel& g, const std::string& feature, const Dataset& d);

// influence normalized by the maximum influence over g's own features; all
// zero when g is constant or nothing moves the output.
double q_of(const RuleModel& g, const std::string& feature, const Dataset& d);

// Sum over the pool of q_of(g, feature) * T(g) with
// T(g) = ((score - min) / (max - min))^p, divided by the sum of T(g); 0/0 is
// 0 (including the max == min case).  Candidate digests are parsed back into
// models.  Throws std::invalid_argument on an empty pool or min >= max-less
// bounds (min > max).
double q_feature(const std::vector<CandidateRecord>& pool, const std::string& feature,
                 const Dataset& d, std::pair<double, double> score_bounds,
                 const QualityConfig& cfg);

// The numerator of q_feature alone (unnormalized weighted influence mass).
double q_feature_raw(const std::vector<CandidateRecord>& pool,
                     const std::string& feature, const Dataset& d,
                     std::pair<double, double> score_bounds, const QualityConfig& cfg);

// q_feature for every feature any pool model references, in one pass (each
// model is parsed and its influences computed once).  Features absent from
// the map have quality 0.
std::map<std::string, double> q_feature_all(const std::vector<CandidateRecord>& pool,
                                            const Dataset& d,
                                            std::pair<double, double> score_bounds,
                                            const QualityConfig& cfg);

}  // namespace featml

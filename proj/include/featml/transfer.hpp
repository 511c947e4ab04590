#pragma once

// Distance-weighted transfer of feature qualities from solved neighbor
// problems to a new query dataset.

#include <string>
#include <utility>
#include <vector>

#include "featml/infomeasure.hpp"
#include "featml/metadb.hpp"

namespace featml {

struct TransferConfig {
    int k = 5;                 // neighbors consulted, >= 1
    double t = 0.1;            // transfer threshold, in [0, 1]
    double c_weight = 0.001;   // weight regularizer, > 0
    QualitySource quality_source = QualitySource::MiFitness;
};

// 1 / (c_weight + distance^2).
double transfer_weight(double distance, double c_weight);

// Weighted mean of the feature's stored quality over the neighbors; a
// neighbor without the feature contributes quality 0 but keeps its weight in
// the denominator.  Empty neighbor list gives 0.
double estimate_probability(
    const std::string& feature,
    const std::vector<std::pair<const MetaDbEntry*, double>>& neighbors,
    const TransferConfig& cfg);

// Features from the k nearest entries that exist in the query's vocabulary
// and whose estimate is >= cfg.t.
FeatureSet select_transfer_set(
    const Dataset& query,
    const std::vector<std::pair<const MetaDbEntry*, double>>& neighbors,
    const TransferConfig& cfg);
FeatureSet select_transfer_set(const Dataset& query, const MetaDb& db,
                               const TransferConfig& cfg);

}  // namespace featml

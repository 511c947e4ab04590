#include "featml/transfer.hpp"

#include <set>
#include <stdexcept>

namespace featml {

namespace {

void check_config(const TransferConfig& cfg) {
    if (cfg.k < 1) throw std::invalid_argument("transfer k must be >= 1");
    if (!(cfg.c_weight > 0.0)) throw std::invalid_argument("c_weight must be > 0");
    if (cfg.t < 0.0) throw std::invalid_argument("transfer threshold must be >= 0");
}

double stored_quality(const MetaDbEntry& e, const std::string& feature,
                      QualitySource source) {
    for (const auto& sf : e.scored_features) {
        if (sf.name == feature)
            return source == QualitySource::MiFitness ? sf.q : sf.q_formal.value_or(0.0);
    }
    return 0.0;  // the entry never scored this feature
}

}  // namespace

double transfer_weight(double distance, double c_weight) {
    return 1.0 / (c_weight + distance * distance);
}

double estimate_probability(
    const std::string& feature,
    const std::vector<std::pair<const MetaDbEntry*, double>>& neighbors,
    const TransferConfig& cfg) {
    check_config(cfg);
    if (neighbors.empty()) return 0.0;
    double num = 0.0, den = 0.0;
    for (const auto& [entry, dist] : neighbors) {
        const double w = transfer_weight(dist, cfg.c_weight);
        num += w * stored_quality(*entry, feature, cfg.quality_source);
        den += w;
    }
    return num / den;
}

FeatureSet select_transfer_set(
    const Dataset& query,
    const std::vector<std::pair<const MetaDbEntry*, double>>& neighbors,
    const TransferConfig& cfg) {
    check_config(cfg);
    std::set<std::string> candidates;
    for (const auto& [entry, dist] : neighbors) {
        (void)dist;
        for (const auto& sf : entry->scored_features) candidates.insert(sf.name);
    }
    std::vector<std::string> kept;
    for (const auto& name : candidates) {
        if (query.feature_index(name) < 0) continue;  // not in the query vocabulary
        if (estimate_probability(name, neighbors, cfg) >= cfg.t) kept.push_back(name);
    }
    return FeatureSet(std::move(kept));
}

FeatureSet select_transfer_set(const Dataset& query, const MetaDb& db,
                               const TransferConfig& cfg) {
    check_config(cfg);
    return select_transfer_set(query, db.neighbors(query, cfg.k), cfg);
}

}  // namespace featml

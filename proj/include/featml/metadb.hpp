#pragma once

// Persistent repository of solved problems: per-dataset scored features, the
// learned candidate pool, score bounds, and the cached pattern distribution,
// indexed for nearest-neighbor lookup.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "featml/metricspace.hpp"

namespace featml {

// Which stored per-feature quality drives transfer estimates.
enum class QualitySource {
    MiFitness,  // q: single-feature fitness
    FormalQ,    // Q: influence-weighted quality from the candidate pool
};

// Raised by MetaDb::load when the file does not match the schema; the
// message names the offending element path.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

struct ScoredFeature {
    std::string name;
    double q = 0.0;                 // single-feature fitness, >= 0
    std::optional<double> q_formal;  // influence-weighted quality, in [0, 1]

    bool operator==(const ScoredFeature&) const = default;
};

struct CandidateRecord {
    std::vector<std::string> features;  // names the model references
    double score = 0.0;                 // -(classification errors), <= 0
    std::string model_digest;           // canonical model serialization

    bool operator==(const CandidateRecord&) const = default;
};

struct MetaDbEntry {
    std::string id;
    std::vector<ScoredFeature> scored_features;
    double min_score = 0.0;  // -(n_rows) of the solved dataset
    double max_score = 0.0;  // 0
    std::vector<CandidateRecord> candidates;
    PatternDistribution distribution;

    // Throws std::invalid_argument on violated invariants (min > max,
    // candidate scores outside bounds, q out of range, duplicate names).
    void validate() const;

    bool operator==(const MetaDbEntry&) const = default;
};

class MetaDb {
public:
    MetaDb() = default;
    MetaDb(MetaDb&&) noexcept = default;
    MetaDb& operator=(MetaDb&&) noexcept = default;

    // Insert or replace by entry id; the distance index always mirrors the
    // entry set.
    void upsert(MetaDbEntry entry);

    std::size_t size() const { return entries_.size(); }
    const MetaDbEntry* find(const std::string& id) const;
    std::vector<std::string> ids() const;  // sorted

    // min(k, size()) nearest entries by sqrt-JSD between the query
    // distribution and each entry's stored distribution.  Empty db gives an
    // empty list.  Pointers stay valid until the next upsert.
    std::vector<std::pair<const MetaDbEntry*, double>> neighbors(
        const PatternDistribution& query, int k) const;
    std::vector<std::pair<const MetaDbEntry*, double>> neighbors(const Dataset& query,
                                                                 int k) const;

    void save(const std::string& path) const;
    static MetaDb load(const std::string& path);

private:
    std::map<std::string, MetaDbEntry> entries_;
    DistanceIndex index_;
};

}  // namespace featml

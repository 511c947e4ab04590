#pragma once

// Row-pattern distributions, the Jensen-Shannon based dataset distance, and
// an exact k-nearest-neighbor index (cover tree with a linear-scan
// reference path).

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"

namespace featml {

// A row pattern: the set of present feature names plus whether the target
// fired.  Total order so distributions have a canonical iteration order.
struct Pattern {
    std::vector<std::string> names;  // sorted unique
    bool target = false;

    auto operator<=>(const Pattern&) const = default;
};

// Empirical distribution over patterns.  Only patterns with positive
// probability are stored; the stored masses sum to 1.
class PatternDistribution {
public:
    PatternDistribution() = default;
    // Throws std::invalid_argument on non-positive masses or total mass far
    // from 1.
    explicit PatternDistribution(std::map<Pattern, double> support);

    const std::map<Pattern, double>& support() const { return support_; }
    bool operator==(const PatternDistribution&) const = default;

private:
    std::map<Pattern, double> support_;
};

// Empirical pattern distribution of a dataset: each row maps to a pattern
// with mass multiplicity / n_rows.  With a projection, only names inside the
// projection are kept in the patterns.
PatternDistribution to_distribution(
    const Dataset& d, const std::optional<FeatureSet>& projection = std::nullopt);

// Jensen-Shannon divergence, base-2 logs, in [0, 1].
double jsd(const PatternDistribution& p, const PatternDistribution& q);

// sqrt(JSD) of the two datasets' pattern distributions; a metric in [0, 1].
double dataset_distance(const Dataset& a, const Dataset& b,
                        const std::optional<FeatureSet>& projection = std::nullopt);

// Exact k-NN over (id, distribution) points under sqrt-JSD.  The cover tree
// obeys the usual leveling / covering / separation invariants, auditable via
// check_invariants(); knn() must return exactly what a linear scan returns,
// ties broken by ascending id.
class DistanceIndex {
public:
    explicit DistanceIndex(double base = 2.0);  // expansion constant, >= 2
    DistanceIndex(DistanceIndex&&) noexcept;
    DistanceIndex& operator=(DistanceIndex&&) noexcept;
    ~DistanceIndex();  // out of line: Node is incomplete here

    // Throws std::invalid_argument on duplicate id.
    void insert(const std::string& id, PatternDistribution dist);

    std::size_t size() const { return points_.size(); }
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;  // insertion order
    const PatternDistribution& at(const std::string& id) const;

    // min(k, size()) nearest points, ascending (distance, id).  Throws
    // std::invalid_argument on an empty index or k < 1.
    std::vector<std::pair<std::string, double>> knn(const PatternDistribution& query,
                                                    int k) const;
    // Reference implementation: full scan, same contract.
    std::vector<std::pair<std::string, double>> knn_linear(
        const PatternDistribution& query, int k) const;

    // Throws std::logic_error if any structural invariant is violated.
    void check_invariants() const;

private:
    struct Node;

    double distance_to_point(const PatternDistribution& query, int point) const;
    void insert_at(Node* n, int point);

    double base_;
    std::vector<std::pair<std::string, PatternDistribution>> points_;
    std::map<std::string, int> by_id_;
    std::unique_ptr<Node> root_;
};

}  // namespace featml

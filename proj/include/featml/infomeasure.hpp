#pragma once

// Empirical mutual information between a feature set and the target, and the
// confidence-penalized fitness built on it.

#include <initializer_list>
#include <string>
#include <vector>

#include "featml/dataset.hpp"

namespace featml {

// Canonical set of feature names: sorted, unique.
class FeatureSet {
public:
    FeatureSet() = default;
    explicit FeatureSet(std::vector<std::string> names);
    FeatureSet(std::initializer_list<std::string> names);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    bool contains(const std::string& name) const;

    FeatureSet with(const std::string& name) const;
    FeatureSet without(const std::string& name) const;

    // Number of names in exactly one of the two sets.
    std::size_t symmetric_difference_size(const FeatureSet& other) const;
    std::size_t intersection_size(const FeatureSet& other) const;

    bool operator==(const FeatureSet&) const = default;
    // Lexicographic on the sorted name lists; used for deterministic
    // tie-breaking.
    bool operator<(const FeatureSet& other) const { return names_ < other.names_; }

private:
    std::vector<std::string> names_;
};

struct FitnessConfig {
    double b = 5.0;  // confidence penalty strength, >= 0
    double r = 1.0;  // exponent balance, in [0, 2]
};

// Plug-in estimate of I(S; Y) in bits over the empirical joint distribution
// of the restriction of rows to s and the target.  Empty set gives 0.
// Throws std::invalid_argument if s mentions a feature d does not have.
double mutual_information(const Dataset& d, const FeatureSet& s);

// N / (N + b * |s|); equals 1 when b = 0 or s is empty.
double confidence(const Dataset& d, const FeatureSet& s, const FitnessConfig& cfg);

// MI(s)^(2-r) * confidence(s)^r, with 0^0 = 1.  Zero whenever MI is zero and
// r < 2.
double fitness(const Dataset& d, const FeatureSet& s, const FitnessConfig& cfg);

}  // namespace featml

#pragma once

// Shared fixtures and independent oracle implementations for the test suite.
// Oracles deliberately use different algorithms than the library (entropy
// identities, exhaustive enumeration, linear scans) so agreement is evidence.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"

namespace testhelp {

// Three small two-word datasets used across the distance and MI tests.
//   W1: rows (word1, word2, target) = (0,0,1) (0,1,1) (0,0,1) (1,0,0)
//   W2: rows (1,1,1) (1,1,1) (1,0,1) (0,0,0)
//   W3: rows (1,1,1) (0,1,1) (1,0,1) (0,0,0)
inline featml::Dataset make_w1() {
    return featml::dataset_from_dense("W1", {"word1", "word2"},
                                      {{0, 0}, {0, 1}, {0, 0}, {1, 0}}, {1, 1, 1, 0});
}
inline featml::Dataset make_w2() {
    return featml::dataset_from_dense("W2", {"word1", "word2"},
                                      {{1, 1}, {1, 1}, {1, 0}, {0, 0}}, {1, 1, 1, 0});
}
inline featml::Dataset make_w3() {
    return featml::dataset_from_dense("W3", {"word1", "word2"},
                                      {{1, 1}, {0, 1}, {1, 0}, {0, 0}}, {1, 1, 1, 0});
}

// Uniformly random dense dataset: up to max_features features, up to
// max_rows rows, iid fair coins everywhere.
inline featml::Dataset random_dataset(std::mt19937_64& rng, int max_features,
                                      int max_rows, const std::string& id = "rnd") {
    std::uniform_int_distribution<int> nf(1, max_features);
    std::uniform_int_distribution<int> nr(1, max_rows);
    std::uniform_int_distribution<int> bit(0, 1);
    const int f = nf(rng), r = nr(rng);
    std::vector<std::string> features;
    for (int i = 0; i < f; ++i) features.push_back("f" + std::to_string(i));
    std::vector<std::vector<int>> values(r, std::vector<int>(f));
    std::vector<int> targets(r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < f; ++j) values[i][j] = bit(rng);
        targets[i] = bit(rng);
    }
    return featml::dataset_from_dense(id, std::move(features), values, targets);
}

inline double entropy(const std::map<std::vector<int>, int>& counts, int total) {
    double h = 0.0;
    for (const auto& [key, c] : counts) {
        (void)key;
        const double p = static_cast<double>(c) / total;
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

// MI oracle via the entropy identity I(S;Y) = H(S) + H(Y) - H(S,Y), a
// different computational path than the library's direct plug-in sum.
inline double oracle_mi(const featml::Dataset& d, const std::vector<std::string>& s) {
    std::vector<int> idx;
    for (const auto& name : s) idx.push_back(d.feature_index(name));
    std::map<std::vector<int>, int> cs, cy, csy;
    for (const auto& row : d.rows) {
        std::vector<int> key;
        for (int i : idx) key.push_back(row.has(i) ? 1 : 0);
        std::vector<int> ykey{row.target};
        std::vector<int> joint = key;
        joint.push_back(row.target);
        ++cs[key];
        ++cy[ykey];
        ++csy[joint];
    }
    const int n = static_cast<int>(d.n_rows());
    const double mi = entropy(cs, n) + entropy(cy, n) - entropy(csy, n);
    return std::max(0.0, mi);
}

// Pattern-distribution oracle: maps each row to (present names, target) by
// direct lookup and tallies multiplicities.
inline std::map<std::pair<std::vector<std::string>, bool>, double> oracle_distribution(
    const featml::Dataset& d) {
    std::map<std::pair<std::vector<std::string>, bool>, int> counts;
    for (const auto& row : d.rows) {
        std::vector<std::string> names;
        for (int i : row.present) names.push_back(d.features[i]);
        std::sort(names.begin(), names.end());
        ++counts[{names, row.target == 1}];
    }
    std::map<std::pair<std::vector<std::string>, bool>, double> out;
    for (const auto& [key, c] : counts)
        out[key] = static_cast<double>(c) / static_cast<double>(d.n_rows());
    return out;
}

// JSD oracle over the pattern maps above, summing over the union support.
inline double oracle_jsd(
    const std::map<std::pair<std::vector<std::string>, bool>, double>& p,
    const std::map<std::pair<std::vector<std::string>, bool>, double>& q) {
    std::set<std::pair<std::vector<std::string>, bool>> keys;
    for (const auto& [k, v] : p) {
        (void)v;
        keys.insert(k);
    }
    for (const auto& [k, v] : q) {
        (void)v;
        keys.insert(k);
    }
    double sum = 0.0;
    for (const auto& k : keys) {
        const double pp = p.count(k) ? p.at(k) : 0.0;
        const double qq = q.count(k) ? q.at(k) : 0.0;
        const double m = 0.5 * (pp + qq);
        if (pp > 0.0) sum += 0.5 * pp * std::log2(pp / m);
        if (qq > 0.0) sum += 0.5 * qq * std::log2(qq / m);
    }
    return sum;
}

inline double oracle_dataset_distance(const featml::Dataset& a,
                                      const featml::Dataset& b) {
    return std::sqrt(std::max(0.0, oracle_jsd(oracle_distribution(a),
                                              oracle_distribution(b))));
}

// Conjunction / XOR planted dataset: y = concept(inputs[0], inputs[1]) with
// optional label noise; remaining features are fair coins.
inline featml::Dataset planted_dataset(const std::string& id, int n_features,
                                       int n_rows, int in1, int in2,
                                       bool conjunction, double noise,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::string> features;
    for (int i = 0; i < n_features; ++i) features.push_back("f" + std::to_string(i));
    std::vector<std::vector<int>> values(n_rows, std::vector<int>(n_features));
    std::vector<int> targets(n_rows);
    for (int r = 0; r < n_rows; ++r) {
        for (int j = 0; j < n_features; ++j) values[r][j] = bit(rng);
        const bool a = values[r][in1] == 1, b = values[r][in2] == 1;
        bool y = conjunction ? (a && b) : (a != b);
        if (noise > 0.0 && unit(rng) < noise) y = !y;
        targets[r] = y ? 1 : 0;
    }
    return featml::dataset_from_dense(id, std::move(features), values, targets);
}

}  // namespace testhelp

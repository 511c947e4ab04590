#include "featml/infomeasure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace featml {

FeatureSet::FeatureSet(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

FeatureSet::FeatureSet(std::initializer_list<std::string> names)
    : FeatureSet(std::vector<std::string>(names)) {}

bool FeatureSet::contains(const std::string& name) const {
    return std::binary_search(names_.begin(), names_.end(), name);
}

FeatureSet FeatureSet::with(const std::string& name) const {
    if (contains(name)) return *this;
    FeatureSet out;
    out.names_.reserve(names_.size() + 1);
    auto pos = std::lower_bound(names_.begin(), names_.end(), name);
    out.names_.insert(out.names_.end(), names_.begin(), pos);
    out.names_.push_back(name);
    out.names_.insert(out.names_.end(), pos, names_.end());
    return out;
}

FeatureSet FeatureSet::without(const std::string& name) const {
    FeatureSet out = *this;
    auto pos = std::lower_bound(out.names_.begin(), out.names_.end(), name);
    if (pos != out.names_.end() && *pos == name) out.names_.erase(pos);
    return out;
}

std::size_t FeatureSet::symmetric_difference_size(const FeatureSet& other) const {
    std::size_t common = intersection_size(other);
    return names_.size() + other.names_.size() - 2 * common;
}

std::size_t FeatureSet::intersection_size(const FeatureSet& other) const {
    std::size_t common = 0, i = 0, j = 0;
    while (i < names_.size() && j < other.names_.size()) {
        int c = names_[i].compare(other.names_[j]);
        if (c == 0) ++common, ++i, ++j;
        else if (c < 0) ++i;
        else ++j;
    }
    return common;
}

double mutual_information(const Dataset& d, const FeatureSet& s) {
    if (s.empty()) return 0.0;
    std::vector<int> idx;
    idx.reserve(s.size());
    for (const auto& name : s.names()) {
        int i = d.feature_index(name);
        if (i < 0)
            throw std::invalid_argument("unknown feature '" + name + "' in dataset '" +
                                        d.id + "'");
        idx.push_back(i);
    }

    // Joint counts over (restriction of the row to s, target).
    std::unordered_map<std::string, long long> joint[2];
    std::unordered_map<std::string, long long> marg_s;
    long long marg_y[2] = {0, 0};
    std::string key(idx.size(), '0');
    for (const auto& row : d.rows) {
        for (std::size_t j = 0; j < idx.size(); ++j) key[j] = row.has(idx[j]) ? '1' : '0';
        ++joint[row.target][key];
        ++marg_s[key];
        ++marg_y[row.target];
    }

    const double n = static_cast<double>(d.n_rows());
    double mi = 0.0;
    for (int y = 0; y < 2; ++y) {
        for (const auto& [key_s, c] : joint[y]) {
            const double pxy = static_cast<double>(c) / n;
            const double px = static_cast<double>(marg_s.at(key_s)) / n;
            const double py = static_cast<double>(marg_y[y]) / n;
            mi += pxy * std::log2(pxy / (px * py));
        }
    }
    return std::max(0.0, mi);
}

double confidence(const Dataset& d, const FeatureSet& s, const FitnessConfig& cfg) {
    if (cfg.b < 0.0) throw std::invalid_argument("confidence penalty b must be >= 0");
    const double n = static_cast<double>(d.n_rows());
    return n / (n + cfg.b * static_cast<double>(s.size()));
}

double fitness(const Dataset& d, const FeatureSet& s, const FitnessConfig& cfg) {
    if (cfg.r < 0.0 || cfg.r > 2.0) throw std::invalid_argument("exponent r must be in [0, 2]");
    const double mi = mutual_information(d, s);
    const double c = confidence(d, s, cfg);
    const double mi_exp = 2.0 - cfg.r;
    const double mi_part = mi_exp == 0.0 ? 1.0 : std::pow(mi, mi_exp);  // 0^0 = 1
    return mi_part * std::pow(c, cfg.r);
}

}  // namespace featml

#include "featml/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace featml {

double q_practical(const Dataset& d, const std::string& feature,
                   const FitnessConfig& cfg) {
    return fitness(d, FeatureSet{feature}, cfg);
}

namespace {

struct ResolvedModel {
    RuleModel::Op op;
    bool negate_output;
    std::vector<std::pair<int, bool>> lits;    // (feature index, negated)
    std::vector<int> feature_idx;              // unique referenced indices
};

ResolvedModel resolve(const RuleModel& g, const Dataset& d) {
    ResolvedModel m{g.op, g.negate_output, {}, {}};
    for (const auto& lit : g.literals) {
        const int idx = d.feature_index(lit.name);
        if (idx < 0)
            throw std::invalid_argument("model references unknown feature '" + lit.name +
                                        "'");
        m.lits.emplace_back(idx, lit.negated);
        m.feature_idx.push_back(idx);
    }
    std::sort(m.feature_idx.begin(), m.feature_idx.end());
    m.feature_idx.erase(std::unique(m.feature_idx.begin(), m.feature_idx.end()),
                        m.feature_idx.end());
    return m;
}

// Evaluates with the value of one feature index flipped (-1 flips nothing).
bool eval_flip(const ResolvedModel& m, const DatasetRow& row, int flip_idx) {
    bool v;
    if (m.op == RuleModel::Op::And) {
        v = true;
        for (const auto& [idx, neg] : m.lits) {
            const bool present = row.has(idx) != (idx == flip_idx);
            if (present == neg) {
                v = false;
                break;
            }
        }
    } else {
        v = false;
        for (const auto& [idx, neg] : m.lits) {
            const bool present = row.has(idx) != (idx == flip_idx);
            if (present != neg) {
                v = true;
                break;
            }
        }
    }
    return m.negate_output ? !v : v;
}

double influence_resolved(const ResolvedModel& m, int fidx, const Dataset& d) {
    long long changed = 0;
    for (const auto& row : d.rows)
        if (eval_flip(m, row, -1) != eval_flip(m, row, fidx)) ++changed;
    return static_cast<double>(changed) / static_cast<double>(d.n_rows());
}

// influence of every feature the model references, by feature index.
std::map<int, double> influences_of(const ResolvedModel& m, const Dataset& d) {
    std::map<int, double> out;
    for (int idx : m.feature_idx) out.emplace(idx, influence_resolved(m, idx, d));
    return out;
}

void check_quality_inputs(const std::vector<CandidateRecord>& pool,
                          std::pair<double, double> bounds, const QualityConfig& cfg) {
    if (pool.empty()) throw std::invalid_argument("candidate pool must not be empty");
    if (bounds.first > bounds.second)
        throw std::invalid_argument("score bounds must satisfy min <= max");
    if (cfg.p < 0.0) throw std::invalid_argument("exponent p must be >= 0");
}

double score_weight(double score, std::pair<double, double> bounds, double p) {
    const auto [lo, hi] = bounds;
    if (hi == lo) return 0.0;  // degenerate bounds: 0/0 reads as 0
    const double x = std::clamp((score - lo) / (hi - lo), 0.0, 1.0);
    return std::pow(x, p);  // pow(0, 0) == 1: p = 0 weighs all models equally
}

}  // namespace

double influence(const RuleModel& g, const std::string& feature, const Dataset& d) {
    const auto names = g.feature_names();
    if (!std::binary_search(names.begin(), names.end(), feature)) return 0.0;
    const ResolvedModel m = resolve(g, d);
    return influence_resolved(m, d.feature_index(feature), d);
}

double q_of(const RuleModel& g, const std::string& feature, const Dataset& d) {
    if (g.literals.empty()) return 0.0;  // constant model
    const ResolvedModel m = resolve(g, d);
    const auto inf = influences_of(m, d);
    double max_inf = 0.0;
    for (const auto& [idx, v] : inf) max_inf = std::max(max_inf, v);
    if (max_inf <= 0.0) return 0.0;  // nothing moves the output on this data
    const int fidx = d.feature_index(feature);
    auto it = fidx < 0 ? inf.end() : inf.find(fidx);
    return it == inf.end() ? 0.0 : it->second / max_inf;
}

double q_feature_raw(const std::vector<CandidateRecord>& pool,
                     const std::string& feature, const Dataset& d,
                     std::pair<double, double> score_bounds, const QualityConfig& cfg) {
    check_quality_inputs(pool, score_bounds, cfg);
    double num = 0.0;
    for (const auto& cand : pool) {
        const RuleModel g = RuleModel::parse(cand.model_digest);
        num += q_of(g, feature, d) * score_weight(cand.score, score_bounds, cfg.p);
    }
    return num;
}

double q_feature(const std::vector<CandidateRecord>& pool, const std::string& feature,
                 const Dataset& d, std::pair<double, double> score_bounds,
                 const QualityConfig& cfg) {
    check_quality_inputs(pool, score_bounds, cfg);
    double num = 0.0, den = 0.0;
    for (const auto& cand : pool) {
        const double w = score_weight(cand.score, score_bounds, cfg.p);
        den += w;
        if (w > 0.0) num += q_of(RuleModel::parse(cand.model_digest), feature, d) * w;
    }
    if (den <= 0.0) return 0.0;
    return num / den;
}

std::map<std::string, double> q_feature_all(const std::vector<CandidateRecord>& pool,
                                            const Dataset& d,
                                            std::pair<double, double> score_bounds,
                                            const QualityConfig& cfg) {
    check_quality_inputs(pool, score_bounds, cfg);
    std::map<std::string, double> num;
    double den = 0.0;
    for (const auto& cand : pool) {
        const double w = score_weight(cand.score, score_bounds, cfg.p);
        den += w;
        if (w <= 0.0) continue;
        const RuleModel g = RuleModel::parse(cand.model_digest);
        if (g.literals.empty()) continue;
        const ResolvedModel m = resolve(g, d);
        const auto inf = influences_of(m, d);
        double max_inf = 0.0;
        for (const auto& [idx, v] : inf) max_inf = std::max(max_inf, v);
        if (max_inf <= 0.0) continue;
        for (const auto& [idx, v] : inf) num[d.features[idx]] += (v / max_inf) * w;
    }
    std::map<std::string, double> out;
    if (den <= 0.0) return out;
    for (const auto& [name, v] : num) out[name] = v / den;
    return out;
}

}  // namespace featml

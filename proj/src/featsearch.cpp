#include "featml/featsearch.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace featml {

namespace {

constexpr unsigned long long kCountCap = 1ULL << 60;

unsigned long long saturating_mul(unsigned long long a, unsigned long long b) {
    if (a == 0 || b == 0) return 0;
    if (a > kCountCap / b) return kCountCap;
    return a * b;
}

unsigned long long binomial_saturating(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned long long r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = saturating_mul(r, n - k + i);
        if (r >= kCountCap) return kCountCap;
        r /= i;
    }
    return r;
}

unsigned long long pow_saturating(unsigned long long b, int e, unsigned long long cap) {
    unsigned long long r = 1;
    for (int i = 0; i < e; ++i) {
        if (b != 0 && r > cap / std::max<unsigned long long>(b, 1)) return cap;
        r *= b;
        if (r >= cap) return cap;
    }
    return std::min(r, cap);
}

// All k-subsets of items, in lexicographic index order.
template <typename Fn>
void for_each_combination(const std::vector<std::string>& items, std::size_t k, Fn&& fn) {
    if (k > items.size()) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k == 0) {  // the single empty combination
        fn(idx);
        return;
    }
    for (;;) {
        fn(idx);
        std::size_t i = k;
        for (;;) {
            --i;
            if (idx[i] != i + items.size() - k) break;
            if (i == 0) return;
        }
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::vector<FeatureSet> neighbor_sets(const FeatureSet& s, int d, std::size_t count,
                                      const std::vector<std::string>& vocab,
                                      std::mt19937_64& rng) {
    if (d < 1) throw std::invalid_argument("edit distance must be >= 1");
    std::vector<FeatureSet> out;
    if (count == 0) return out;

    const std::vector<std::string>& removable = s.names();
    std::vector<std::string> addable;
    for (const auto& name : vocab)
        if (!s.contains(name)) addable.push_back(name);
    std::sort(addable.begin(), addable.end());
    addable.erase(std::unique(addable.begin(), addable.end()), addable.end());

    // r removals and d - r additions land exactly d edits away.
    const int ud = d;
    const int r_min = std::max(0, ud - static_cast<int>(addable.size()));
    const int r_max = std::min(ud, static_cast<int>(removable.size()));
    if (r_min > r_max) return out;

    unsigned long long total = 0;
    for (int r = r_min; r <= r_max; ++r) {
        total += saturating_mul(binomial_saturating(removable.size(), r),
                                binomial_saturating(addable.size(), ud - r));
        if (total >= kCountCap) break;
    }

    if (total <= count) {
        // Small neighborhood: enumerate it completely.
        for (int r = r_min; r <= r_max; ++r) {
            for_each_combination(removable, static_cast<std::size_t>(r), [&](const auto& rem) {
                for_each_combination(
                    addable, static_cast<std::size_t>(ud - r), [&](const auto& add) {
                        std::vector<std::string> names;
                        std::size_t ri = 0;
                        for (std::size_t i = 0; i < removable.size(); ++i) {
                            if (ri < rem.size() && rem[ri] == i) {
                                ++ri;
                                continue;
                            }
                            names.push_back(removable[i]);
                        }
                        for (std::size_t a : add) names.push_back(addable[a]);
                        out.push_back(FeatureSet(std::move(names)));
                    });
            });
        }
        return out;
    }

    std::set<std::vector<std::string>> seen;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 10 * count;
    std::uniform_int_distribution<int> pick_r(r_min, r_max);
    while (out.size() < count && attempts < max_attempts) {
        ++attempts;
        const int r = pick_r(rng);
        // Partial Fisher-Yates over index vectors.
        std::vector<std::size_t> rem_idx(removable.size());
        for (std::size_t i = 0; i < rem_idx.size(); ++i) rem_idx[i] = i;
        for (int i = 0; i < r; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, rem_idx.size() - 1);
            std::swap(rem_idx[i], rem_idx[pick(rng)]);
        }
        std::vector<std::size_t> add_idx(addable.size());
        for (std::size_t i = 0; i < add_idx.size(); ++i) add_idx[i] = i;
        for (int i = 0; i < ud - r; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, add_idx.size() - 1);
            std::swap(add_idx[i], add_idx[pick(rng)]);
        }
        std::set<std::size_t> removed(rem_idx.begin(), rem_idx.begin() + r);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < removable.size(); ++i)
            if (!removed.count(i)) names.push_back(removable[i]);
        for (int i = 0; i < ud - r; ++i) names.push_back(addable[add_idx[i]]);
        std::sort(names.begin(), names.end());
        if (seen.insert(names).second) out.push_back(FeatureSet(std::move(names)));
    }
    return out;
}

namespace {

// Tie order for batch winners: higher fitness, then smaller set, then
// lexicographic names.
bool improves_over(double fit, const FeatureSet& set, double best_fit,
                   const FeatureSet& best_set) {
    if (fit != best_fit) return fit > best_fit;
    if (set.size() != best_set.size()) return set.size() < best_set.size();
    return set < best_set;
}

}  // namespace

SearchResult hillclimb(const Dataset& d, const FeatureSet& seed, const SearchConfig& cfg) {
    if (cfg.max_evals < 1) throw std::invalid_argument("max_evals must be >= 1");
    if (cfg.max_edit_distance < 1)
        throw std::invalid_argument("max_edit_distance must be >= 1");
    for (const auto& name : seed.names())
        if (d.feature_index(name) < 0)
            throw std::invalid_argument("seed feature '" + name +
                                        "' is not in the dataset vocabulary");

    std::mt19937_64 rng(cfg.rng_seed);
    SearchResult res;

    FeatureSet current = seed;
    double current_fit = fitness(d, current, cfg.fitness_cfg);
    res.evals_used = 1;
    res.best_set = current;
    res.best_fitness = current_fit;
    res.evals_to_best = 1;
    res.trace.emplace_back(res.evals_used, res.best_fitness);
    if (cfg.target && res.best_fitness >= *cfg.target) {
        res.target_reached = true;
        return res;
    }

    int dist = 1;
    while (dist < cfg.max_edit_distance && res.evals_used < cfg.max_evals) {
        const std::uint64_t remaining = cfg.max_evals - res.evals_used;
        std::uint64_t h = std::min<std::uint64_t>(
            std::max<std::uint64_t>(remaining / 10, 1),
            pow_saturating(d.features.size(), dist, cfg.max_evals));
        h = std::min(h, remaining);

        const auto batch =
            neighbor_sets(current, dist, static_cast<std::size_t>(h), d.features, rng);

        bool have_winner = false;
        FeatureSet winner;
        double winner_fit = 0.0;
        for (const auto& cand : batch) {
            const double fit = fitness(d, cand, cfg.fitness_cfg);
            ++res.evals_used;
            if (fit > res.best_fitness) {
                res.best_fitness = fit;
                res.best_set = cand;
                res.evals_to_best = res.evals_used;
                res.trace.emplace_back(res.evals_used, res.best_fitness);
            }
            if (!have_winner || improves_over(fit, cand, winner_fit, winner)) {
                have_winner = true;
                winner = cand;
                winner_fit = fit;
            }
            if (cfg.target && fit >= *cfg.target) {
                res.target_reached = true;
                return res;
            }
            if (res.evals_used == cfg.max_evals) break;
        }

        if (have_winner && winner_fit > current_fit) {
            current = std::move(winner);
            current_fit = winner_fit;
            dist = 1;
        } else {
            ++dist;
        }
    }
    return res;
}

SearchResult run_with_target(const Dataset& d, const FeatureSet& seed,
                             const SearchConfig& cfg) {
    if (!cfg.target)
        throw std::invalid_argument("run_with_target requires cfg.target");
    return hillclimb(d, seed, cfg);
}

}  // namespace featml

#include "featml/metricspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace featml {

PatternDistribution::PatternDistribution(std::map<Pattern, double> support)
    : support_(std::move(support)) {
    double sum = 0.0;
    for (const auto& [pat, p] : support_) {
        (void)pat;
        if (!(p > 0.0)) throw std::invalid_argument("pattern mass must be positive");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("pattern masses must sum to 1");
}

PatternDistribution to_distribution(const Dataset& d,
                                    const std::optional<FeatureSet>& projection) {
    d.validate();
    std::map<Pattern, long long> counts;
    for (const auto& row : d.rows) {
        Pattern pat;
        pat.target = row.target == 1;
        pat.names.reserve(row.present.size());
        for (int idx : row.present) {
            const std::string& name = d.features[idx];
            if (!projection || projection->contains(name)) pat.names.push_back(name);
        }
        std::sort(pat.names.begin(), pat.names.end());
        ++counts[std::move(pat)];
    }
    const double n = static_cast<double>(d.n_rows());
    std::map<Pattern, double> support;
    for (auto& [pat, c] : counts) support.emplace(pat, static_cast<double>(c) / n);
    return PatternDistribution(std::move(support));
}

double jsd(const PatternDistribution& p, const PatternDistribution& q) {
    // One merged pass in pattern order; the two per-pattern terms are added
    // first so jsd(p, q) == jsd(q, p) bit-for-bit.
    const auto& ps = p.support();
    const auto& qs = q.support();
    auto ip = ps.begin();
    auto iq = qs.begin();
    double acc = 0.0;
    auto term = [](double x, double m) { return x > 0.0 ? 0.5 * x * std::log2(x / m) : 0.0; };
    while (ip != ps.end() || iq != qs.end()) {
        double pp = 0.0, qq = 0.0;
        if (iq == qs.end() || (ip != ps.end() && ip->first < iq->first)) {
            pp = ip->second;
            ++ip;
        } else if (ip == ps.end() || iq->first < ip->first) {
            qq = iq->second;
            ++iq;
        } else {
            pp = ip->second;
            qq = iq->second;
            ++ip;
            ++iq;
        }
        const double m = 0.5 * (pp + qq);
        acc += term(pp, m) + term(qq, m);
    }
    return std::clamp(acc, 0.0, 1.0);
}

namespace {

double distribution_distance(const PatternDistribution& a, const PatternDistribution& b) {
    return std::sqrt(jsd(a, b));
}

}  // namespace

double dataset_distance(const Dataset& a, const Dataset& b,
                        const std::optional<FeatureSet>& projection) {
    return distribution_distance(to_distribution(a, projection),
                                 to_distribution(b, projection));
}

// -------------------------------------------------------------------------
// Cover tree.  Every child sits exactly one level below its parent, within
// covdist(parent) = base^level(parent) of it, and the children of one node
// are pairwise more than sepdist(parent) = base^(level(parent)-1) apart.
// Any descendant of n stays within covdist(n) * base / (base - 1) of n,
// which is what the k-NN bound uses.

struct DistanceIndex::Node {
    int point;
    int level;
    std::vector<std::unique_ptr<Node>> children;
};

namespace {

constexpr int kMinLevel = -64;

double covdist(double base, int level) { return std::pow(base, level); }

// Smallest level whose cover radius reaches d.
int level_for(double base, double d) {
    if (!(d > 0.0)) return kMinLevel;
    int level = static_cast<int>(std::ceil(std::log(d) / std::log(base)));
    while (covdist(base, level) < d) ++level;
    while (level > kMinLevel && covdist(base, level - 1) >= d) --level;
    return std::max(level, kMinLevel);
}

}  // namespace

DistanceIndex::DistanceIndex(double base) : base_(base) {
    if (!(base >= 2.0)) throw std::invalid_argument("expansion base must be >= 2");
}

DistanceIndex::DistanceIndex(DistanceIndex&&) noexcept = default;
DistanceIndex& DistanceIndex::operator=(DistanceIndex&&) noexcept = default;
DistanceIndex::~DistanceIndex() = default;

bool DistanceIndex::contains(const std::string& id) const { return by_id_.count(id) > 0; }

std::vector<std::string> DistanceIndex::ids() const {
    std::vector<std::string> out;
    out.reserve(points_.size());
    for (const auto& [id, dist] : points_) {
        (void)dist;
        out.push_back(id);
    }
    return out;
}

const PatternDistribution& DistanceIndex::at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw std::out_of_range("no point with id '" + id + "'");
    return points_[it->second].second;
}

double DistanceIndex::distance_to_point(const PatternDistribution& query, int point) const {
    return distribution_distance(query, points_[point].second);
}

void DistanceIndex::insert_at(Node* n, int point) {
    // Descend while some child covers the point; otherwise attach it here.
    for (;;) {
        Node* next = nullptr;
        for (const auto& child : n->children) {
            if (distance_to_point(points_[point].second, child->point) <=
                covdist(base_, child->level)) {
                next = child.get();
                break;
            }
        }
        if (!next) {
            n->children.push_back(
                std::make_unique<Node>(Node{point, n->level - 1, {}}));
            return;
        }
        n = next;
    }
}

void DistanceIndex::insert(const std::string& id, PatternDistribution dist) {
    if (by_id_.count(id)) throw std::invalid_argument("duplicate id '" + id + "'");
    const int point = static_cast<int>(points_.size());
    points_.emplace_back(id, std::move(dist));
    by_id_[id] = point;

    if (!root_) {
        root_ = std::make_unique<Node>(Node{point, 0, {}});
        return;
    }
    const double d0 = distance_to_point(points_[point].second, root_->point);
    if (root_->children.empty()) {
        root_->level = level_for(base_, d0);  // tighten a lone root before first child
        insert_at(root_.get(), point);
        return;
    }
    while (d0 > covdist(base_, root_->level)) {
        // Promote some leaf to a new root one level up; the old root stays
        // covered because any descendant is within covdist * base/(base-1)
        // <= covdist * base of it.
        Node* parent = root_.get();
        while (!parent->children.back()->children.empty())
            parent = parent->children.back().get();
        std::unique_ptr<Node> leaf = std::move(parent->children.back());
        parent->children.pop_back();
        auto new_root = std::make_unique<Node>(Node{leaf->point, root_->level + 1, {}});
        new_root->children.push_back(std::move(root_));
        root_ = std::move(new_root);
    }
    insert_at(root_.get(), point);
}

std::vector<std::pair<std::string, double>> DistanceIndex::knn_linear(
    const PatternDistribution& query, int k) const {
    if (points_.empty()) throw std::invalid_argument("knn on empty index");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<std::pair<std::string, double>> all;
    all.reserve(points_.size());
    for (const auto& [id, dist] : points_)
        all.emplace_back(id, distribution_distance(query, dist));
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
    return all;
}

std::vector<std::pair<std::string, double>> DistanceIndex::knn(
    const PatternDistribution& query, int k) const {
    if (points_.empty()) throw std::invalid_argument("knn on empty index");
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    const std::size_t want = static_cast<std::size_t>(k);
    // Ascending (distance, id); the back is the current k-th best.
    std::vector<std::pair<double, int>> best;
    auto better = [this](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first < b.first;
        return points_[a.second].first < points_[b.second].first;
    };
    auto offer = [&](double dist, int point) {
        std::pair<double, int> cand{dist, point};
        if (best.size() == want && !better(cand, best.back())) return;
        auto pos = std::lower_bound(best.begin(), best.end(), cand, better);
        best.insert(pos, cand);
        if (best.size() > want) best.pop_back();
    };
    auto bound = [&] {
        return best.size() == want ? best.back().first
                                   : std::numeric_limits<double>::infinity();
    };

    struct Item {
        double lb;  // lower bound on any distance inside the subtree
        const Node* node;
    };
    auto cmp = [](const Item& a, const Item& b) { return a.lb > b.lb; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    const double slack = base_ / (base_ - 1.0);

    const double droot = distance_to_point(query, root_->point);
    offer(droot, root_->point);
    heap.push({std::max(0.0, droot - covdist(base_, root_->level) * slack), root_.get()});

    while (!heap.empty()) {
        Item it = heap.top();
        heap.pop();
        if (it.lb > bound()) break;  // equality still explored: ids can beat ties
        for (const auto& child : it.node->children) {
            const double dc = distance_to_point(query, child->point);
            offer(dc, child->point);
            const double lb = std::max(0.0, dc - covdist(base_, child->level) * slack);
            if (lb <= bound()) heap.push({lb, child.get()});
        }
    }

    std::vector<std::pair<std::string, double>> out;
    out.reserve(best.size());
    for (const auto& [dist, point] : best) out.emplace_back(points_[point].first, dist);
    return out;
}

void DistanceIndex::check_invariants() const {
    if (!root_) {
        if (!points_.empty()) throw std::logic_error("non-empty index without a root");
        return;
    }
    std::set<int> seen;
    // Walk iteratively; levels deepen only 1 per edge but trees can chain.
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n->point).second)
            throw std::logic_error("point appears twice in the tree");
        const double cd = covdist(base_, n->level);
        const double sep = covdist(base_, n->level - 1);
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            const Node* c = n->children[i].get();
            if (c->level != n->level - 1) throw std::logic_error("leveling violated");
            if (distance_to_point(points_[c->point].second, n->point) > cd * (1.0 + 1e-12))
                throw std::logic_error("covering violated");
            for (std::size_t j = i + 1; j < n->children.size(); ++j) {
                const Node* c2 = n->children[j].get();
                if (distance_to_point(points_[c->point].second, c2->point) <=
                    sep * (1.0 - 1e-12))
                    throw std::logic_error("separation violated");
            }
            stack.push_back(c);
        }
    }
    if (seen.size() != points_.size())
        throw std::logic_error("tree does not contain every inserted point");
}

}  // namespace featml

#include "featml/metadb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace featml {

using nlohmann::json;

namespace {

// Marks the target column inside a persisted pattern's name list.
constexpr const char* kTargetMarker = "__target__";

}  // namespace

void MetaDbEntry::validate() const {
    if (id.empty()) throw std::invalid_argument("entry id must not be empty");
    if (!(min_score <= max_score))
        throw std::invalid_argument("entry '" + id + "': min_score > max_score");
    std::unordered_set<std::string> names;
    for (const auto& sf : scored_features) {
        if (!std::isfinite(sf.q) || sf.q < 0.0)
            throw std::invalid_argument("entry '" + id + "': q of '" + sf.name +
                                        "' must be finite and >= 0");
        if (sf.q_formal && (!(*sf.q_formal >= 0.0) || !(*sf.q_formal <= 1.0)))
            throw std::invalid_argument("entry '" + id + "': Q of '" + sf.name +
                                        "' must be in [0, 1]");
        if (!names.insert(sf.name).second)
            throw std::invalid_argument("entry '" + id + "': duplicate scored feature '" +
                                        sf.name + "'");
    }
    for (const auto& c : candidates) {
        if (c.score > 0.0)
            throw std::invalid_argument("entry '" + id + "': candidate score > 0");
        if (c.score < min_score || c.score > max_score)
            throw std::invalid_argument("entry '" + id +
                                        "': candidate score outside score bounds");
    }
}

void MetaDb::upsert(MetaDbEntry entry) {
    entry.validate();
    const bool existed = entries_.count(entry.id) > 0;
    const std::string id = entry.id;
    entries_[id] = std::move(entry);
    if (!existed) {
        index_.insert(id, entries_[id].distribution);
    } else {
        // Replacement can change the cached distribution; rebuild the index.
        DistanceIndex fresh;
        for (const auto& [eid, e] : entries_) fresh.insert(eid, e.distribution);
        index_ = std::move(fresh);
    }
}

const MetaDbEntry* MetaDb::find(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> MetaDb::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) {
        (void)e;
        out.push_back(id);
    }
    return out;
}

std::vector<std::pair<const MetaDbEntry*, double>> MetaDb::neighbors(
    const PatternDistribution& query, int k) const {
    std::vector<std::pair<const MetaDbEntry*, double>> out;
    if (entries_.empty() || k < 1) return out;
    for (const auto& [id, dist] : index_.knn(query, k))
        out.emplace_back(&entries_.at(id), dist);
    return out;
}

std::vector<std::pair<const MetaDbEntry*, double>> MetaDb::neighbors(const Dataset& query,
                                                                     int k) const {
    return neighbors(to_distribution(query), k);
}

// --- persistence ----------------------------------------------------------

namespace {

json pattern_to_json(const Pattern& pat) {
    json names = json::array();
    for (const auto& n : pat.names) names.push_back(n);
    if (pat.target) names.push_back(kTargetMarker);
    return names;
}

json entry_to_json(const MetaDbEntry& e) {
    json j;
    j["id"] = e.id;
    j["min_score"] = e.min_score;
    j["max_score"] = e.max_score;
    json sf = json::array();
    for (const auto& s : e.scored_features) {
        json o;
        o["name"] = s.name;
        o["q"] = s.q;
        if (s.q_formal) o["Q"] = *s.q_formal;
        sf.push_back(std::move(o));
    }
    j["scored_features"] = std::move(sf);
    json cands = json::array();
    for (const auto& c : e.candidates) {
        json o;
        o["features"] = c.features;
        o["score"] = c.score;
        o["model"] = c.model_digest;
        cands.push_back(std::move(o));
    }
    j["candidates"] = std::move(cands);
    json dist = json::array();
    for (const auto& [pat, p] : e.distribution.support()) {
        json o;
        o["pattern"] = pattern_to_json(pat);
        o["p"] = p;
        dist.push_back(std::move(o));
    }
    j["distribution"] = std::move(dist);
    return j;
}

[[noreturn]] void schema_fail(const std::string& path, const std::string& msg) {
    throw SchemaError(path + ": " + msg);
}

const json& need(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) schema_fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_fail(path + "." + key, "missing");
    return *it;
}

double need_number(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_number()) schema_fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::string need_string(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_string()) schema_fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

const json& need_array(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_array()) schema_fail(path + "." + key, "expected an array");
    return v;
}

MetaDbEntry entry_from_json(const json& j, const std::string& path) {
    MetaDbEntry e;
    e.id = need_string(j, "id", path);
    e.min_score = need_number(j, "min_score", path);
    e.max_score = need_number(j, "max_score", path);

    const json& sf = need_array(j, "scored_features", path);
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const std::string p = path + ".scored_features[" + std::to_string(i) + "]";
        ScoredFeature s;
        s.name = need_string(sf[i], "name", p);
        s.q = need_number(sf[i], "q", p);
        if (sf[i].contains("Q")) {
            if (!sf[i]["Q"].is_number()) schema_fail(p + ".Q", "expected a number");
            s.q_formal = sf[i]["Q"].get<double>();
        }
        e.scored_features.push_back(std::move(s));
    }

    const json& cands = need_array(j, "candidates", path);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::string p = path + ".candidates[" + std::to_string(i) + "]";
        CandidateRecord c;
        const json& feats = need_array(cands[i], "features", p);
        for (std::size_t f = 0; f < feats.size(); ++f) {
            if (!feats[f].is_string())
                schema_fail(p + ".features[" + std::to_string(f) + "]", "expected a string");
            c.features.push_back(feats[f].get<std::string>());
        }
        c.score = need_number(cands[i], "score", p);
        if (cands[i].contains("model")) {
            if (!cands[i]["model"].is_string()) schema_fail(p + ".model", "expected a string");
            c.model_digest = cands[i]["model"].get<std::string>();
        }
        e.candidates.push_back(std::move(c));
    }

    const json& dist = need_array(j, "distribution", path);
    std::map<Pattern, double> support;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const std::string p = path + ".distribution[" + std::to_string(i) + "]";
        const json& names = need_array(dist[i], "pattern", p);
        Pattern pat;
        for (std::size_t f = 0; f < names.size(); ++f) {
            if (!names[f].is_string())
                schema_fail(p + ".pattern[" + std::to_string(f) + "]", "expected a string");
            std::string name = names[f].get<std::string>();
            if (name == kTargetMarker) {
                if (pat.target) schema_fail(p + ".pattern", "duplicate target marker");
                pat.target = true;
            } else {
                pat.names.push_back(std::move(name));
            }
        }
        std::sort(pat.names.begin(), pat.names.end());
        const double mass = need_number(dist[i], "p", p);
        if (!support.emplace(std::move(pat), mass).second)
            schema_fail(p + ".pattern", "duplicate pattern");
    }
    try {
        e.distribution = PatternDistribution(std::move(support));
    } catch (const std::invalid_argument& ex) {
        schema_fail(path + ".distribution", ex.what());
    }

    try {
        e.validate();
    } catch (const std::invalid_argument& ex) {
        schema_fail(path, ex.what());
    }
    return e;
}

}  // namespace

void MetaDb::save(const std::string& path) const {
    json root;
    json entries = json::array();
    for (const auto& [id, e] : entries_) {
        (void)id;
        entries.push_back(entry_to_json(e));
    }
    root["entries"] = std::move(entries);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << root.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

MetaDb MetaDb::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    json root;
    try {
        in >> root;
    } catch (const json::parse_error& ex) {
        throw SchemaError(path + ": " + ex.what());
    }
    const json& entries = need_array(root, "entries", "$");
    MetaDb db;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        MetaDbEntry e = entry_from_json(entries[i], "entries[" + std::to_string(i) + "]");
        if (db.find(e.id)) throw SchemaError("entries[" + std::to_string(i) + "].id: duplicate '" + e.id + "'");
        db.upsert(std::move(e));
    }
    return db;
}

}  // namespace featml

#include "featml/learner.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace featml {

void RuleModel::canonicalize() {
    std::sort(literals.begin(), literals.end());
    literals.erase(std::unique(literals.begin(), literals.end()), literals.end());
    if (literals.size() == 1) {
        op = Op::And;  // operator is irrelevant for one literal
        if (negate_output) {
            literals[0].negated = !literals[0].negated;
            negate_output = false;
        }
    } else if (literals.empty() && negate_output) {
        op = op == Op::And ? Op::Or : Op::And;  // not(true) = false
        negate_output = false;
    }
}

bool RuleModel::eval(const Dataset& d, const DatasetRow& row) const {
    bool v = op == Op::And;
    for (const auto& lit : literals) {
        const int idx = d.feature_index(lit.name);
        if (idx < 0)
            throw std::invalid_argument("model references unknown feature '" + lit.name + "'");
        const bool val = row.has(idx) != lit.negated;
        if (op == Op::And)
            v = v && val;
        else
            v = v || val;
    }
    return negate_output ? !v : v;
}

std::string RuleModel::serialize() const {
    auto lit_str = [](const Literal& l) {
        return l.negated ? "(not " + l.name + ")" : l.name;
    };
    std::string core;
    if (literals.empty()) {
        core = op == Op::And ? "true" : "false";
    } else if (literals.size() == 1) {
        core = lit_str(literals[0]);
    } else {
        core = op == Op::And ? "(and" : "(or";
        for (const auto& l : literals) core += " " + lit_str(l);
        core += ")";
    }
    return negate_output ? "(not " + core + ")" : core;
}

namespace {

std::vector<std::string> tokenize_model(const std::string& text) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : text) {
        if (c == '(' || c == ')') {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
            toks.push_back(std::string(1, c));
        } else if (c == ' ') {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

[[noreturn]] void parse_model_fail(const std::string& text) {
    throw std::invalid_argument("malformed model '" + text + "'");
}

// Grammar of serialize():
//   model   := "(not" core ")" | core
//   core    := "true" | "false" | literal | "(" op literal+ ")"
//   literal := name | "(not" name ")"
struct ModelParser {
    const std::vector<std::string>& toks;
    const std::string& text;
    std::size_t pos = 0;

    const std::string& peek() {
        if (pos >= toks.size()) parse_model_fail(text);
        return toks[pos];
    }
    std::string take() {
        if (pos >= toks.size()) parse_model_fail(text);
        return toks[pos++];
    }
    void expect(const std::string& t) {
        if (take() != t) parse_model_fail(text);
    }
    bool is_name(const std::string& t) {
        return t != "(" && t != ")" && t != "and" && t != "or" && t != "not" &&
               t != "true" && t != "false" && !t.empty();
    }

    Literal parse_literal() {
        if (peek() == "(") {
            expect("(");
            expect("not");
            std::string name = take();
            if (!is_name(name)) parse_model_fail(text);
            expect(")");
            return Literal{std::move(name), true};
        }
        std::string name = take();
        if (!is_name(name)) parse_model_fail(text);
        return Literal{std::move(name), false};
    }

    RuleModel parse_core() {
        RuleModel m;
        if (peek() == "true") {
            take();
            m.op = RuleModel::Op::And;
            return m;
        }
        if (peek() == "false") {
            take();
            m.op = RuleModel::Op::Or;
            return m;
        }
        if (peek() != "(") {
            m.literals.push_back(parse_literal());
            return m;
        }
        // "(not X)" is either a literal or an output negation; look ahead.
        if (toks.size() > pos + 1 && toks[pos + 1] == "not") {
            expect("(");
            expect("not");
            if (peek() == "(" || peek() == "true" || peek() == "false") {
                RuleModel inner = parse_core();
                expect(")");
                inner.negate_output = !inner.negate_output;
                return inner;
            }
            std::string name = take();
            if (!is_name(name)) parse_model_fail(text);
            expect(")");
            m.literals.push_back(Literal{std::move(name), true});
            return m;
        }
        expect("(");
        std::string op = take();
        if (op == "and")
            m.op = RuleModel::Op::And;
        else if (op == "or")
            m.op = RuleModel::Op::Or;
        else
            parse_model_fail(text);
        while (peek() != ")") m.literals.push_back(parse_literal());
        expect(")");
        if (m.literals.size() < 2) parse_model_fail(text);  // serialize never emits these
        return m;
    }

    RuleModel parse() {
        RuleModel m = parse_core();
        if (pos != toks.size()) parse_model_fail(text);
        m.canonicalize();
        return m;
    }
};

}  // namespace

RuleModel RuleModel::parse(const std::string& text) {
    auto toks = tokenize_model(text);
    if (toks.empty()) parse_model_fail(text);
    ModelParser p{toks, text};
    return p.parse();
}

std::vector<std::string> RuleModel::feature_names() const {
    std::vector<std::string> names;
    names.reserve(literals.size());
    for (const auto& l : literals) names.push_back(l.name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

namespace {

// Name-resolved evaluator for the learn loop.
struct CompiledModel {
    RuleModel::Op op;
    bool negate_output;
    std::vector<std::pair<int, bool>> lits;  // (feature index, negated)

    bool eval(const DatasetRow& row) const {
        bool v;
        if (op == RuleModel::Op::And) {
            v = true;
            for (const auto& [idx, neg] : lits)
                if (row.has(idx) == neg) {
                    v = false;
                    break;
                }
        } else {
            v = false;
            for (const auto& [idx, neg] : lits)
                if (row.has(idx) != neg) {
                    v = true;
                    break;
                }
        }
        return negate_output ? !v : v;
    }
};

double score_compiled(const CompiledModel& cm, const Dataset& d) {
    long long errors = 0;
    for (const auto& row : d.rows)
        if (static_cast<int>(cm.eval(row)) != row.target) ++errors;
    return -static_cast<double>(errors);
}

}  // namespace

double score_model(const RuleModel& m, const Dataset& d, const FeatureSet& s) {
    for (const auto& name : s.names())
        if (d.feature_index(name) < 0)
            throw std::invalid_argument("selected feature '" + name +
                                        "' is not in the dataset vocabulary");
    CompiledModel cm{m.op, m.negate_output, {}};
    for (const auto& lit : m.literals) {
        if (!s.contains(lit.name))
            throw std::invalid_argument("model literal '" + lit.name +
                                        "' outside the selected feature set");
        cm.lits.emplace_back(d.feature_index(lit.name), lit.negated);
    }
    return score_compiled(cm, d);
}

LearnOutcome learn(const Dataset& d, const FeatureSet& s, const LearnConfig& cfg) {
    if (s.empty()) throw std::invalid_argument("learn requires a non-empty feature set");
    if (cfg.eval_budget < 1) throw std::invalid_argument("eval_budget must be >= 1");
    if (cfg.max_literals < 1) throw std::invalid_argument("max_literals must be >= 1");
    if (cfg.pool_size < 1) throw std::invalid_argument("pool_size must be >= 1");
    for (const auto& name : s.names())
        if (d.feature_index(name) < 0)
            throw std::invalid_argument("selected feature '" + name +
                                        "' is not in the dataset vocabulary");

    std::mt19937_64 rng(cfg.rng_seed);
    const auto& names = s.names();

    struct PoolEntry {
        RuleModel model;
        double score;
    };
    std::map<std::string, PoolEntry> evaluated;  // digest -> model, score
    std::uint64_t evals = 0;
    std::string best_digest;
    double best_score = -std::numeric_limits<double>::infinity();

    auto compile = [&](const RuleModel& m) {
        CompiledModel cm{m.op, m.negate_output, {}};
        for (const auto& lit : m.literals)
            cm.lits.emplace_back(d.feature_index(lit.name), lit.negated);
        return cm;
    };
    // Scores a canonicalized model unless its digest was already seen;
    // returns whether a fresh evaluation happened.
    auto try_eval = [&](RuleModel m) {
        m.canonicalize();
        std::string digest = m.serialize();
        if (evaluated.count(digest)) return false;
        const double score = score_compiled(compile(m), d);
        ++evals;
        if (score > best_score || (score == best_score && digest < best_digest)) {
            best_score = score;
            best_digest = digest;
        }
        evaluated.emplace(std::move(digest), PoolEntry{std::move(m), score});
        return true;
    };

    // Constants first, then every single literal.
    std::vector<RuleModel> seeds;
    seeds.push_back(RuleModel{RuleModel::Op::And, {}, false});  // true
    seeds.push_back(RuleModel{RuleModel::Op::Or, {}, false});   // false
    for (const auto& name : names) {
        seeds.push_back(RuleModel{RuleModel::Op::And, {Literal{name, false}}, false});
        seeds.push_back(RuleModel{RuleModel::Op::And, {Literal{name, true}}, false});
    }
    for (auto& m : seeds) {
        if (evals >= cfg.eval_budget || best_score == 0.0) break;
        try_eval(std::move(m));
    }

    auto random_literal = [&] {
        std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1);
        return Literal{names[pick_name(rng)], (rng() & 1u) != 0};
    };
    auto random_model = [&] {
        RuleModel m;
        m.op = (rng() & 1u) ? RuleModel::Op::And : RuleModel::Op::Or;
        std::uniform_int_distribution<int> pick_n(1, std::max(1, cfg.max_literals / 2));
        const int n = pick_n(rng);
        for (int i = 0; i < n; ++i) m.literals.push_back(random_literal());
        return m;
    };
    auto mutate = [&](const RuleModel& base) {
        RuleModel m = base;
        for (int attempt = 0; attempt < 8; ++attempt) {
            switch (rng() % 5) {
                case 0:  // flip a literal sign
                    if (m.literals.empty()) continue;
                    {
                        std::uniform_int_distribution<std::size_t> pick(0, m.literals.size() - 1);
                        const std::size_t i = pick(rng);
                        m.literals[i].negated = !m.literals[i].negated;
                    }
                    return m;
                case 1:  // add a literal
                    if (static_cast<int>(m.literals.size()) >= cfg.max_literals) continue;
                    m.literals.push_back(random_literal());
                    return m;
                case 2:  // remove a literal
                    if (m.literals.empty()) continue;
                    {
                        std::uniform_int_distribution<std::size_t> pick(0, m.literals.size() - 1);
                        m.literals.erase(m.literals.begin() + pick(rng));
                    }
                    return m;
                case 3:  // swap the operator
                    m.op = m.op == RuleModel::Op::And ? RuleModel::Op::Or : RuleModel::Op::And;
                    return m;
                case 4:  // toggle the output negation
                    m.negate_output = !m.negate_output;
                    return m;
            }
        }
        return random_model();
    };

    std::uint64_t stalled = 0;
    while (evals < cfg.eval_budget && best_score < 0.0) {
        const RuleModel& base = evaluated.at(best_digest).model;
        // Occasional random restarts keep the climb from looping on a local
        // optimum's already-seen neighborhood.
        RuleModel cand = (stalled > 0 && stalled % 64 == 0) ? random_model() : mutate(base);
        cand.canonicalize();
        const double before = best_score;
        bool fresh = false;
        for (int attempt = 0; attempt < 16 && !fresh; ++attempt) {
            fresh = try_eval(cand);
            if (!fresh) cand = mutate(base), cand.canonicalize();
        }
        if (!fresh) {
            fresh = try_eval(random_model());
            if (!fresh) {
                ++stalled;
                if (stalled > 512) break;  // model space exhausted
                continue;
            }
        }
        stalled = best_score > before ? 0 : stalled + 1;
    }

    // Keep the best distinct models: score descending, digest ascending.
    std::vector<std::pair<std::string, const PoolEntry*>> ranked;
    ranked.reserve(evaluated.size());
    for (const auto& [digest, pe] : evaluated) ranked.emplace_back(digest, &pe);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second->score != b.second->score) return a.second->score > b.second->score;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<std::size_t>(cfg.pool_size))
        ranked.resize(static_cast<std::size_t>(cfg.pool_size));

    LearnOutcome out;
    out.evals_used = evals;
    for (const auto& [digest, pe] : ranked) {
        CandidateRecord rec;
        rec.features = pe->model.feature_names();
        rec.score = pe->score;
        rec.model_digest = digest;
        out.pool.push_back(std::move(rec));
    }
    out.best = out.pool.front();
    return out;
}

}  // namespace featml

#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "featml/learner.hpp"
#include "helpers.hpp"

using namespace featml;
using Op = RuleModel::Op;

namespace {

RuleModel model(Op op, std::vector<Literal> lits, bool neg = false) {
    RuleModel m;
    m.op = op;
    m.literals = std::move(lits);
    m.negate_output = neg;
    return m;
}

RuleModel random_model(std::mt19937_64& rng) {
    static const std::vector<std::string> names = {"f1", "f2", "f3", "g10", "zz"};
    RuleModel m;
    m.op = (rng() & 1u) ? Op::And : Op::Or;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i)
        m.literals.push_back(Literal{names[rng() % names.size()], (rng() & 1u) != 0});
    m.negate_output = (rng() & 1u) != 0;
    return m;
}

// Best score over every flat rule expressible on the feature set: all subsets
// of the signed literals, both operators, with and without output negation.
double exhaustive_best(const Dataset& d, const FeatureSet& s, int max_literals) {
    std::vector<Literal> alphabet;
    for (const auto& n : s.names()) {
        alphabet.push_back(Literal{n, false});
        alphabet.push_back(Literal{n, true});
    }
    const int a = static_cast<int>(alphabet.size());
    double best = -1e300;
    for (int mask = 0; mask < (1 << a); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) > max_literals) continue;
        for (int op = 0; op < 2; ++op) {
            for (int neg = 0; neg < 2; ++neg) {
                RuleModel m;
                m.op = op ? Op::Or : Op::And;
                for (int i = 0; i < a; ++i)
                    if (mask & (1 << i)) m.literals.push_back(alphabet[i]);
                m.negate_output = neg != 0;
                best = std::max(best, score_model(m, d, s));
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("models serialize to fixed prefix forms") {
    CHECK(model(Op::And, {}).serialize() == "true");
    CHECK(model(Op::Or, {}).serialize() == "false");
    CHECK(model(Op::And, {{"f3", false}}).serialize() == "f3");
    CHECK(model(Op::And, {{"f7", true}}).serialize() == "(not f7)");
    CHECK(model(Op::And, {{"f3", false}, {"f7", true}}).serialize() ==
          "(and f3 (not f7))");
    CHECK(model(Op::Or, {{"f1", false}, {"f2", false}}).serialize() == "(or f1 f2)");
    CHECK(model(Op::Or, {{"f1", false}, {"f2", false}}, true).serialize() ==
          "(not (or f1 f2))");
}

TEST_CASE("parsing inverts serialization") {
    for (const char* text : {"true", "false", "f3", "(not f7)", "(and f3 (not f7))",
                             "(or f1 f2)", "(not (or f1 f2))", "(and (not a) b c)"}) {
        const RuleModel m = RuleModel::parse(text);
        CHECK(m.serialize() == text);
    }

    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 300; ++iter) {
        RuleModel m = random_model(rng);
        m.canonicalize();
        const RuleModel back = RuleModel::parse(m.serialize());
        CHECK(back == m);
        CHECK(back.serialize() == m.serialize());
    }
}

TEST_CASE("canonicalization sorts, dedups and folds negations") {
    RuleModel dup = model(Op::And, {{"f1", false}, {"f1", false}});
    dup.canonicalize();
    CHECK(dup.serialize() == "f1");

    RuleModel unsorted = model(Op::Or, {{"f2", false}, {"f1", false}});
    unsorted.canonicalize();
    CHECK(unsorted.serialize() == "(or f1 f2)");

    RuleModel single_neg = model(Op::Or, {{"f1", false}}, true);
    single_neg.canonicalize();
    CHECK(single_neg.serialize() == "(not f1)");
    CHECK_FALSE(single_neg.negate_output);

    RuleModel not_true = model(Op::And, {}, true);
    not_true.canonicalize();
    CHECK(not_true.serialize() == "false");

    RuleModel not_false = model(Op::Or, {}, true);
    not_false.canonicalize();
    CHECK(not_false.serialize() == "true");
}

TEST_CASE("canonicalization preserves the evaluated function") {
    std::mt19937_64 rng(11);
    const Dataset d = testhelp::random_dataset(rng, 5, 16, "rt");
    std::vector<std::string> names = d.features;
    for (int iter = 0; iter < 200; ++iter) {
        RuleModel m;
        m.op = (rng() & 1u) ? Op::And : Op::Or;
        const int n = static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i)
            m.literals.push_back(Literal{names[rng() % names.size()], (rng() & 1u) != 0});
        m.negate_output = (rng() & 1u) != 0;

        RuleModel canon = m;
        canon.canonicalize();
        for (const auto& row : d.rows) CHECK(m.eval(d, row) == canon.eval(d, row));
    }
}

TEST_CASE("evaluation follows the boolean truth tables") {
    const Dataset d = dataset_from_dense(
        "tt", {"a", "b"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 0, 0, 1});
    auto evals = [&](const RuleModel& m) {
        std::vector<int> out;
        for (const auto& row : d.rows) out.push_back(m.eval(d, row) ? 1 : 0);
        return out;
    };
    CHECK(evals(model(Op::And, {{"a", false}, {"b", false}})) ==
          std::vector<int>{0, 0, 0, 1});
    CHECK(evals(model(Op::Or, {{"a", false}, {"b", false}})) ==
          std::vector<int>{0, 1, 1, 1});
    CHECK(evals(model(Op::And, {{"a", true}})) == std::vector<int>{1, 1, 0, 0});
    CHECK(evals(model(Op::Or, {{"a", false}, {"b", true}})) ==
          std::vector<int>{1, 0, 1, 1});
    CHECK(evals(model(Op::Or, {{"a", false}, {"b", false}}, true)) ==
          std::vector<int>{1, 0, 0, 0});
    CHECK(evals(model(Op::And, {})) == std::vector<int>{1, 1, 1, 1});
    CHECK(evals(model(Op::Or, {})) == std::vector<int>{0, 0, 0, 0});

    RuleModel unknown = model(Op::And, {{"zzz", false}});
    CHECK_THROWS_AS(unknown.eval(d, d.rows[0]), std::invalid_argument);
}

TEST_CASE("malformed model text is rejected") {
    for (const char* text :
         {"", "(", ")", "(and)", "(and f1)", "(or f1)", "f1 f2", "(and f1 f2",
          "and f1 f2)", "(xor f1 f2)", "(not)", "not f1", "(and true f1)",
          "(or f1 not)", "true false"}) {
        CHECK_THROWS_AS(RuleModel::parse(text), std::invalid_argument);
    }
}

TEST_CASE("scoring counts misclassified rows negatively") {
    const Dataset w1 = testhelp::make_w1();  // targets 1,1,1,0
    const FeatureSet vocab{"word1", "word2"};
    CHECK(score_model(model(Op::And, {}), w1, vocab) == -1.0);
    CHECK(score_model(model(Op::Or, {}), w1, vocab) == -3.0);

    const Dataset ones = dataset_from_dense("ones", {"a"}, {{1}, {0}}, {1, 1});
    CHECK(score_model(model(Op::And, {}), ones, FeatureSet{"a"}) == 0.0);

    const Dataset planted =
        testhelp::planted_dataset("p", 10, 120, 3, 7, true, 0.0, 5);
    const FeatureSet pair{"f3", "f7"};
    CHECK(score_model(model(Op::And, {{"f3", false}, {"f7", false}}), planted, pair) ==
          0.0);

    const Dataset tt = dataset_from_dense(
        "tt", {"a", "b"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {1, 0, 0, 0});
    CHECK(score_model(model(Op::Or, {{"a", false}, {"b", false}}, true), tt,
                      FeatureSet{"a", "b"}) == 0.0);

    CHECK_THROWS_AS(score_model(model(Op::And, {{"f3", false}}), planted,
                                FeatureSet{"f7"}),
                    std::invalid_argument);
    CHECK_THROWS_AS(score_model(model(Op::And, {}), planted, FeatureSet{"nope"}),
                    std::invalid_argument);
}

TEST_CASE("learning inputs are validated") {
    const Dataset d = testhelp::make_w1();
    LearnConfig cfg;
    CHECK_THROWS_AS(learn(d, FeatureSet{}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(learn(d, FeatureSet{"nope"}, cfg), std::invalid_argument);
    cfg.eval_budget = 0;
    CHECK_THROWS_AS(learn(d, FeatureSet{"word1"}, cfg), std::invalid_argument);
    cfg = LearnConfig{};
    cfg.max_literals = 0;
    CHECK_THROWS_AS(learn(d, FeatureSet{"word1"}, cfg), std::invalid_argument);
    cfg = LearnConfig{};
    cfg.pool_size = 0;
    CHECK_THROWS_AS(learn(d, FeatureSet{"word1"}, cfg), std::invalid_argument);
}

TEST_CASE("a budget of one yields a single-model pool") {
    const Dataset d = testhelp::make_w1();
    LearnConfig cfg;
    cfg.eval_budget = 1;
    const LearnOutcome out = learn(d, FeatureSet{"word1"}, cfg);
    CHECK(out.evals_used == 1);
    REQUIRE(out.pool.size() == 1);
    CHECK(out.best == out.pool.front());
    CHECK(out.best.model_digest == "true");
    CHECK(out.best.score == -1.0);
}

TEST_CASE("the best model never loses to an affordable constant") {
    std::mt19937_64 rng(19);
    for (int iter = 0; iter < 20; ++iter) {
        const Dataset d = testhelp::random_dataset(rng, 5, 24);
        FeatureSet s{d.features.front()};
        LearnConfig cfg;
        cfg.eval_budget = 60;
        cfg.rng_seed = rng();
        const LearnOutcome out = learn(d, s, cfg);
        int pos = 0;
        for (const auto& row : d.rows) pos += row.target;
        const double const_best =
            -static_cast<double>(std::min<int>(pos, static_cast<int>(d.n_rows()) - pos));
        CHECK(out.best.score >= const_best);
    }
}

TEST_CASE("a feature equal to the target is learned immediately") {
    const Dataset d = dataset_from_dense(
        "eq", {"f", "junk"}, {{1, 1}, {0, 1}, {1, 0}, {0, 0}}, {1, 0, 1, 0});
    LearnConfig cfg;
    const LearnOutcome out = learn(d, FeatureSet{"f", "junk"}, cfg);
    CHECK(out.best.score == 0.0);
    CHECK(out.best.model_digest == "f");
    CHECK(out.evals_used <= 4);  // constants, then the first matching literal
}

TEST_CASE("learning is deterministic in its configuration") {
    std::mt19937_64 rng(23);
    const Dataset d = testhelp::random_dataset(rng, 6, 30, "det");
    LearnConfig cfg;
    cfg.eval_budget = 300;
    cfg.rng_seed = 99;
    const FeatureSet s(std::vector<std::string>(d.features));
    const LearnOutcome a = learn(d, s, cfg);
    const LearnOutcome b = learn(d, s, cfg);
    CHECK(a.evals_used == b.evals_used);
    CHECK(a.best == b.best);
    REQUIRE(a.pool.size() == b.pool.size());
    for (std::size_t i = 0; i < a.pool.size(); ++i) CHECK(a.pool[i] == b.pool[i]);
}

TEST_CASE("the pool holds the best distinct models in rank order") {
    std::mt19937_64 rng(27);
    for (int iter = 0; iter < 10; ++iter) {
        const Dataset d = testhelp::random_dataset(rng, 6, 30);
        LearnConfig cfg;
        cfg.eval_budget = 250;
        cfg.pool_size = 10;
        cfg.rng_seed = rng();
        const FeatureSet s(std::vector<std::string>(d.features));
        const LearnOutcome out = learn(d, s, cfg);

        REQUIRE(!out.pool.empty());
        CHECK(out.pool.size() <= 10);
        CHECK(out.best == out.pool.front());
        std::set<std::string> digests;
        for (std::size_t i = 0; i < out.pool.size(); ++i) {
            const auto& rec = out.pool[i];
            digests.insert(rec.model_digest);
            // features field lists exactly what the digest references
            CHECK(RuleModel::parse(rec.model_digest).feature_names() == rec.features);
            CHECK(rec.score <= 0.0);
            CHECK(rec.score >= -static_cast<double>(d.n_rows()));
            if (i > 0) {
                const auto& prev = out.pool[i - 1];
                const bool ordered = prev.score > rec.score ||
                                     (prev.score == rec.score &&
                                      prev.model_digest < rec.model_digest);
                CHECK(ordered);
            }
        }
        CHECK(digests.size() == out.pool.size());
    }
}

TEST_CASE("a noisy planted conjunction is learned to the exhaustive optimum") {
    const FeatureSet pair{"f3", "f7"};
    int optimal = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset d =
            testhelp::planted_dataset("noisy", 12, 200, 3, 7, true, 0.05, 400 + seed);
        LearnConfig cfg;
        cfg.eval_budget = 10000;
        cfg.rng_seed = seed;
        const LearnOutcome out = learn(d, pair, cfg);

        const double oracle = exhaustive_best(d, pair, cfg.max_literals);
        CHECK(out.best.score <= oracle);
        // ~5% flipped labels: the best rule stays within 8% of perfect
        CHECK(out.best.score >= -16.0);
        if (out.best.score == oracle) ++optimal;
    }
    CHECK(optimal >= 9);
}

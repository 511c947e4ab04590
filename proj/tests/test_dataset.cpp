#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "featml/dataset.hpp"
#include "featml/infomeasure.hpp"
#include "featml/metricspace.hpp"
#include "helpers.hpp"

using namespace featml;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("featml_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

}  // namespace

TEST_CASE("dataset_from_dense builds sparse rows") {
    const Dataset d = testhelp::make_w2();
    CHECK(d.n_rows() == 4);
    CHECK(d.features == std::vector<std::string>{"word1", "word2"});
    CHECK(d.rows[0].present == std::vector<int>{0, 1});
    CHECK(d.rows[2].present == std::vector<int>{0});
    CHECK(d.rows[3].present.empty());
    CHECK(d.rows[0].target == 1);
    CHECK(d.rows[3].target == 0);
    CHECK(d.rows[2].has(0));
    CHECK(!d.rows[2].has(1));
    CHECK(d.feature_index("word2") == 1);
    CHECK(d.feature_index("absent") == -1);
}

TEST_CASE("validate rejects structural breakage") {
    Dataset d = testhelp::make_w1();
    CHECK_NOTHROW(d.validate());

    SUBCASE("duplicate feature names") {
        d.features = {"a", "a"};
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("whitespace in names") {
        d.features = {"a b", "c"};
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("no rows") {
        d.rows.clear();
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("non-binary target") {
        d.rows[0].target = 2;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("unsorted indices") {
        d.rows[0].present = {1, 0};
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("repeated index") {
        d.rows[0].present = {0, 0};
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("index out of range") {
        d.rows[0].present = {2};
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
}

TEST_CASE("save/load round-trips the fixtures") {
    const fs::path dir = temp_dir("roundtrip");
    for (Dataset d : {testhelp::make_w1(), testhelp::make_w2(), testhelp::make_w3()}) {
        const std::string path = (dir / (d.id + ".ds")).string();
        save_dataset(d, path);
        Dataset back = load_dataset(path);
        CHECK(back.id == path);
        back.id = d.id;
        CHECK(back == d);
    }
}

TEST_CASE("save/load round-trips an all-empty-rows dataset") {
    const fs::path dir = temp_dir("roundtrip_empty");
    const Dataset d =
        dataset_from_dense("empty", {"a", "b"}, {{0, 0}, {0, 0}}, {1, 0});
    const std::string path = (dir / "empty.ds").string();
    save_dataset(d, path);
    Dataset back = load_dataset(path);
    back.id = d.id;
    CHECK(back == d);
}

TEST_CASE("save/load round-trips random datasets") {
    const fs::path dir = temp_dir("roundtrip_rnd");
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        const Dataset d = testhelp::random_dataset(rng, 8, 16);
        const std::string path = (dir / "r.ds").string();
        save_dataset(d, path);
        Dataset back = load_dataset(path);
        back.id = d.id;
        CHECK(back == d);
    }
}

TEST_CASE("parser names the offending line") {
    const fs::path dir = temp_dir("parse_errors");
    auto load_expecting = [&](const std::string& text, const std::string& fragment) {
        const fs::path p = dir / "bad.ds";
        write_file(p, text);
        try {
            load_dataset(p.string());
            FAIL_CHECK("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };

    load_expecting("", ":1:");                                   // empty file
    load_expecting("rows a b\n1 0\n", ":1:");                    // bad header keyword
    load_expecting("features a a\n1 0\n", ":1:");                // duplicate name
    load_expecting("features a b\n", ":1:");                     // no data rows
    load_expecting("features a b\n2 0\n", ":2:");                // non-binary label
    load_expecting("features a b\n1 1 0\n", ":2:");              // decreasing indices
    load_expecting("features a b\n1 0 0\n", ":2:");              // repeated index
    load_expecting("features a b\n1 0 2\n", ":2:");              // index out of range
    load_expecting("features a b\n1  0\n", ":2:");               // empty field
    load_expecting("features a b\n1 0x\n", ":2:");               // junk in number
    load_expecting("features a b\n1\t0\n", ":2:");               // tab separator
    load_expecting("features a b\r\n1 0\n", ":1:");              // CR line ending
    load_expecting("features a b\n0 1\n1 -1\n", ":3:");          // negative index
}

TEST_CASE("load_collection orders by filename and keys by stem") {
    const fs::path dir = temp_dir("collection");
    const Dataset d = testhelp::make_w1();
    save_dataset(d, (dir / "b_second.ds").string());
    save_dataset(d, (dir / "a_first.ds").string());
    save_dataset(d, (dir / "c_third.ds").string());
    write_file(dir / "ignored.txt", "not a dataset\n");

    const DatasetCollection c = load_collection(dir.string());
    REQUIRE(c.datasets.size() == 3);
    CHECK(c.datasets[0].id == "a_first");
    CHECK(c.datasets[1].id == "b_second");
    CHECK(c.datasets[2].id == "c_third");
    CHECK(c.datasets[0].rows == d.rows);
}

TEST_CASE("mi_prefilter drops target-independent features") {
    // f0 is independent of the target in counts (present once per class);
    // f1 equals the target.
    const Dataset d = dataset_from_dense("pf", {"f0", "f1"},
                                         {{1, 1}, {0, 1}, {1, 0}, {0, 0}},
                                         {1, 1, 0, 0});
    CHECK(testhelp::oracle_mi(d, {"f0"}) == doctest::Approx(0.0));
    CHECK(testhelp::oracle_mi(d, {"f1"}) == doctest::Approx(1.0));

    const Dataset kept = mi_prefilter(d, 0.001);
    CHECK(kept.id == "pf");
    CHECK(kept.features == std::vector<std::string>{"f1"});
    // Re-indexing: f1 was index 1, becomes index 0.
    CHECK(kept.rows[0].present == std::vector<int>{0});
    CHECK(kept.rows[2].present.empty());
    CHECK(kept.n_rows() == d.n_rows());

    CHECK(mi_prefilter(d, 0.0).features == d.features);
}

TEST_CASE("mi_prefilter can empty the vocabulary") {
    const Dataset d = dataset_from_dense("pf0", {"f0"}, {{1}, {0}, {1}, {0}},
                                         {1, 1, 0, 0});
    const Dataset kept = mi_prefilter(d, 0.001);
    CHECK(kept.features.empty());
    CHECK(kept.n_rows() == 4);
}

TEST_CASE("generator is a pure function of its spec") {
    SynthSpec spec;
    spec.n_datasets = 6;
    spec.n_clusters = 2;
    spec.features_per_vocab = 12;
    spec.rows_per_dataset = 30;
    spec.label_noise_rate = 0.1;
    spec.rng_seed = 99;
    const auto [c1, t1] = generate_collection_with_truth(spec);
    const auto [c2, t2] = generate_collection_with_truth(spec);
    REQUIRE(c1.datasets.size() == 6);
    CHECK(c1.datasets == c2.datasets);
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].dataset_id == t2[i].dataset_id);
        CHECK(t1[i].informative == t2[i].informative);
        CHECK(t1[i].concept_inputs == t2[i].concept_inputs);
        CHECK(t1[i].is_conjunction == t2[i].is_conjunction);
        CHECK(t1[i].cluster == t2[i].cluster);
    }
    CHECK(generate_collection(spec).datasets == c1.datasets);
}

TEST_CASE("generated datasets are structurally valid and labeled by truth") {
    SynthSpec spec;
    spec.n_datasets = 8;
    spec.n_clusters = 3;
    spec.features_per_vocab = 15;
    spec.rows_per_dataset = 40;
    spec.planted_set_size = 2;
    spec.rng_seed = 5;
    const auto [coll, truth] = generate_collection_with_truth(spec);

    for (std::size_t i = 0; i < coll.datasets.size(); ++i) {
        const Dataset& d = coll.datasets[i];
        const SynthTruth& t = truth[i];
        CHECK_NOTHROW(d.validate());
        CHECK(d.id == t.dataset_id);
        CHECK(t.cluster == static_cast<int>(i) % 3);
        CHECK(d.features.size() == 15);
        CHECK(d.n_rows() == 40);
        for (const auto& name : t.informative) CHECK(d.feature_index(name) >= 0);

        // Noiseless: every label equals the planted concept exactly.
        REQUIRE(t.concept_inputs.size() == 2);
        const int i1 = d.feature_index(t.concept_inputs[0]);
        const int i2 = d.feature_index(t.concept_inputs[1]);
        for (const auto& row : d.rows) {
            const bool a = row.has(i1), b = row.has(i2);
            const bool y = t.is_conjunction ? (a && b) : (a != b);
            CHECK(row.target == (y ? 1 : 0));
        }
    }
    CHECK(coll.datasets[0].id == "ds_0000");
    CHECK(coll.datasets[7].id == "ds_0007");
}

TEST_CASE("label noise flips roughly its share of labels") {
    SynthSpec spec;
    spec.n_datasets = 1;
    spec.features_per_vocab = 10;
    spec.rows_per_dataset = 500;
    spec.label_noise_rate = 0.2;
    spec.rng_seed = 17;
    const auto [coll, truth] = generate_collection_with_truth(spec);
    const Dataset& d = coll.datasets[0];
    const SynthTruth& t = truth[0];
    const int i1 = d.feature_index(t.concept_inputs[0]);
    const int i2 = d.feature_index(t.concept_inputs[1]);
    int flipped = 0;
    for (const auto& row : d.rows) {
        const bool a = row.has(i1), b = row.has(i2);
        const bool y = t.is_conjunction ? (a && b) : (a != b);
        if (row.target != (y ? 1 : 0)) ++flipped;
    }
    CHECK(flipped > 50);
    CHECK(flipped < 150);
}

TEST_CASE("cluster tightness controls shared planted names") {
    SynthSpec spec;
    spec.n_datasets = 6;
    spec.n_clusters = 2;
    spec.features_per_vocab = 12;
    spec.rows_per_dataset = 10;
    spec.planted_set_size = 2;
    spec.rng_seed = 3;

    SUBCASE("tightness 1: same-cluster datasets share all planted names") {
        spec.cluster_tightness = 1.0;
        const auto [coll, truth] = generate_collection_with_truth(spec);
        (void)coll;
        for (std::size_t i = 0; i < truth.size(); ++i)
            for (std::size_t j = i + 1; j < truth.size(); ++j) {
                if (truth[i].cluster != truth[j].cluster) continue;
                std::set<std::string> a(truth[i].informative.begin(),
                                        truth[i].informative.end());
                std::set<std::string> b(truth[j].informative.begin(),
                                        truth[j].informative.end());
                CHECK(a == b);
            }
    }
    SUBCASE("tightness 0: planted names are private to each dataset") {
        spec.cluster_tightness = 0.0;
        const auto [coll, truth] = generate_collection_with_truth(spec);
        (void)coll;
        std::set<std::string> all;
        std::size_t total = 0;
        for (const auto& t : truth) {
            all.insert(t.informative.begin(), t.informative.end());
            total += t.informative.size();
        }
        CHECK(all.size() == total);
    }
}

TEST_CASE("clustered collections are closer within clusters than across") {
    SynthSpec spec;
    spec.n_datasets = 80;
    spec.n_clusters = 8;
    spec.cluster_tightness = 0.9;
    spec.rng_seed = 11;
    const auto [coll, truth] = generate_collection_with_truth(spec);

    std::vector<PatternDistribution> dists;
    for (const auto& d : coll.datasets) dists.push_back(to_distribution(d));

    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < dists.size(); ++i)
        for (std::size_t j = i + 1; j < dists.size(); ++j) {
            const double dd = std::sqrt(jsd(dists[i], dists[j]));
            if (truth[i].cluster == truth[j].cluster) {
                intra += dd;
                ++n_intra;
            } else {
                inter += dd;
                ++n_inter;
            }
        }
    REQUIRE(n_intra > 0);
    REQUIRE(n_inter > 0);
    CHECK(intra / n_intra < inter / n_inter);
}

TEST_CASE("generator rejects out-of-range specs") {
    SynthSpec spec;
    SUBCASE("no datasets") {
        spec.n_datasets = 0;
        CHECK_THROWS_AS(generate_collection(spec), std::invalid_argument);
    }
    SUBCASE("more clusters than datasets") {
        spec.n_datasets = 2;
        spec.n_clusters = 3;
        CHECK_THROWS_AS(generate_collection(spec), std::invalid_argument);
    }
    SUBCASE("vocabulary smaller than planted set") {
        spec.features_per_vocab = 1;
        spec.planted_set_size = 2;
        CHECK_THROWS_AS(generate_collection(spec), std::invalid_argument);
    }
    SUBCASE("noise rate 1") {
        spec.label_noise_rate = 1.0;
        CHECK_THROWS_AS(generate_collection(spec), std::invalid_argument);
    }
    SUBCASE("tightness above 1") {
        spec.cluster_tightness = 1.5;
        CHECK_THROWS_AS(generate_collection(spec), std::invalid_argument);
    }
}

#include "featml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "featml/infomeasure.hpp"
#include "rng_util.hpp"

namespace featml {

namespace fs = std::filesystem;

bool DatasetRow::has(int feature_index) const {
    return std::binary_search(present.begin(), present.end(), feature_index);
}

int Dataset::feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i] == name) return static_cast<int>(i);
    return -1;
}

void Dataset::validate() const {
    if (rows.empty()) throw std::invalid_argument("dataset '" + id + "' has no rows");
    std::unordered_set<std::string> seen;
    for (const auto& f : features) {
        if (f.empty() || f.find_first_of(" \t\r\n") != std::string::npos)
            throw std::invalid_argument("dataset '" + id + "': bad feature name '" + f + "'");
        if (!seen.insert(f).second)
            throw std::invalid_argument("dataset '" + id + "': duplicate feature '" + f + "'");
    }
    const int n = static_cast<int>(features.size());
    for (const auto& row : rows) {
        if (row.target != 0 && row.target != 1)
            throw std::invalid_argument("dataset '" + id + "': target must be 0 or 1");
        int prev = -1;
        for (int idx : row.present) {
            if (idx <= prev)
                throw std::invalid_argument("dataset '" + id +
                                            "': feature indices not strictly increasing");
            if (idx < 0 || idx >= n)
                throw std::invalid_argument("dataset '" + id + "': feature index " +
                                            std::to_string(idx) + " out of range");
            prev = idx;
        }
    }
}

Dataset dataset_from_dense(const std::string& id, std::vector<std::string> features,
                           const std::vector<std::vector<int>>& values,
                           const std::vector<int>& targets) {
    if (values.size() != targets.size())
        throw std::invalid_argument("dataset_from_dense: values/targets size mismatch");
    Dataset d;
    d.id = id;
    d.features = std::move(features);
    d.rows.reserve(values.size());
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (values[r].size() != d.features.size())
            throw std::invalid_argument("dataset_from_dense: row width mismatch");
        DatasetRow row;
        row.target = targets[r];
        for (std::size_t c = 0; c < values[r].size(); ++c)
            if (values[r][c]) row.present.push_back(static_cast<int>(c));
        d.rows.push_back(std::move(row));
    }
    d.validate();
    return d;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& msg) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + msg);
}

// Strict split on single spaces: no leading/trailing space, no empty tokens.
std::vector<std::string> split_fields(const std::string& path, int line_no,
                                      const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t sp = line.find(' ', start);
        std::string tok = line.substr(start, sp == std::string::npos ? sp : sp - start);
        if (tok.empty()) parse_fail(path, line_no, "empty field");
        if (tok.find_first_of("\t\r") != std::string::npos)
            parse_fail(path, line_no, "illegal whitespace in field");
        out.push_back(std::move(tok));
        if (sp == std::string::npos) break;
        start = sp + 1;
    }
    return out;
}

int parse_index(const std::string& path, int line_no, const std::string& tok, int n_features) {
    int v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0)
        parse_fail(path, line_no, "bad feature index '" + tok + "'");
    if (v >= n_features)
        parse_fail(path, line_no, "feature index " + std::to_string(v) + " out of range (" +
                                      std::to_string(n_features) + " features declared)");
    return v;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ":1: cannot open file");

    Dataset d;
    d.id = path;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_fields(path, line_no, line);
        if (line_no == 1) {
            if (fields.empty() || fields[0] != "features")
                parse_fail(path, 1, "expected 'features' header");
            d.features.assign(fields.begin() + 1, fields.end());
            std::unordered_set<std::string> seen;
            for (const auto& f : d.features)
                if (!seen.insert(f).second)
                    parse_fail(path, 1, "duplicate feature name '" + f + "'");
            continue;
        }
        DatasetRow row;
        if (fields[0] == "0")
            row.target = 0;
        else if (fields[0] == "1")
            row.target = 1;
        else
            parse_fail(path, line_no, "label must be 0 or 1, got '" + fields[0] + "'");
        int prev = -1;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            int idx = parse_index(path, line_no, fields[i],
                                  static_cast<int>(d.features.size()));
            if (idx <= prev) parse_fail(path, line_no, "feature indices not strictly increasing");
            row.present.push_back(idx);
            prev = idx;
        }
        d.rows.push_back(std::move(row));
    }
    if (line_no == 0) parse_fail(path, 1, "empty file");
    if (d.rows.empty()) parse_fail(path, 1, "dataset has no data rows");
    return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
    d.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "features";
    for (const auto& f : d.features) out << ' ' << f;
    out << '\n';
    for (const auto& row : d.rows) {
        out << row.target;
        for (int idx : row.present) out << ' ' << idx;
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

DatasetCollection load_collection(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error("collection directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ds") files.push_back(e.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    DatasetCollection c;
    for (const auto& f : files) {
        Dataset d = load_dataset(f.string());
        d.id = f.stem().string();  // "<dir>/ds_0001.ds" is entry "ds_0001"
        c.datasets.push_back(std::move(d));
    }
    return c;
}

Dataset mi_prefilter(const Dataset& d, double mi_threshold) {
    d.validate();
    std::vector<int> kept;  // old indices, ascending
    for (std::size_t i = 0; i < d.features.size(); ++i) {
        if (mutual_information(d, FeatureSet{d.features[i]}) >= mi_threshold)
            kept.push_back(static_cast<int>(i));
    }
    Dataset out;
    out.id = d.id;
    out.features.reserve(kept.size());
    std::vector<int> remap(d.features.size(), -1);
    for (std::size_t j = 0; j < kept.size(); ++j) {
        remap[kept[j]] = static_cast<int>(j);
        out.features.push_back(d.features[kept[j]]);
    }
    out.rows.reserve(d.rows.size());
    for (const auto& row : d.rows) {
        DatasetRow nr;
        nr.target = row.target;
        for (int idx : row.present)
            if (remap[idx] >= 0) nr.present.push_back(remap[idx]);
        out.rows.push_back(std::move(nr));
    }
    return out;
}

namespace {

void check_synth_spec(const SynthSpec& s) {
    if (s.n_datasets < 1) throw std::invalid_argument("n_datasets must be >= 1");
    if (s.n_clusters < 1 || s.n_clusters > s.n_datasets)
        throw std::invalid_argument("n_clusters must be in [1, n_datasets]");
    if (s.planted_set_size < 1) throw std::invalid_argument("planted_set_size must be >= 1");
    if (s.features_per_vocab < s.planted_set_size)
        throw std::invalid_argument("features_per_vocab must cover the planted set");
    if (s.rows_per_dataset < 1) throw std::invalid_argument("rows_per_dataset must be >= 1");
    if (s.label_noise_rate < 0.0 || s.label_noise_rate >= 1.0)
        throw std::invalid_argument("label_noise_rate must be in [0, 1)");
    if (s.cluster_tightness < 0.0 || s.cluster_tightness > 1.0)
        throw std::invalid_argument("cluster_tightness must be in [0, 1]");
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t n,
                                          std::mt19937_64& rng) {
    for (std::size_t i = 0; i < n && i < pool.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(std::min(n, pool.size()));
    return pool;
}

std::string padded(int v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

std::pair<DatasetCollection, std::vector<SynthTruth>>
generate_collection_with_truth(const SynthSpec& spec) {
    check_synth_spec(spec);

    // Cluster planted vocabularies and the shared noise pool.
    std::vector<std::vector<std::string>> planted(spec.n_clusters);
    for (int c = 0; c < spec.n_clusters; ++c)
        for (int j = 0; j < spec.planted_set_size; ++j)
            planted[c].push_back("w" + std::to_string(c) + "_" + std::to_string(j));
    std::vector<std::string> noise_pool;
    for (int i = 0; i < 2 * spec.features_per_vocab; ++i)
        noise_pool.push_back("n" + std::to_string(i));

    DatasetCollection coll;
    std::vector<SynthTruth> truth;

    for (int i = 0; i < spec.n_datasets; ++i) {
        std::mt19937_64 rng(detail::mix_seed(spec.rng_seed, static_cast<std::uint64_t>(i)));
        const int cluster = i % spec.n_clusters;

        int n_shared = static_cast<int>(
            std::llround(spec.cluster_tightness * spec.planted_set_size));
        n_shared = std::clamp(n_shared, 0, spec.planted_set_size);

        std::vector<std::string> informative =
            sample_without_replacement(planted[cluster], n_shared, rng);
        for (int j = n_shared; j < spec.planted_set_size; ++j)
            informative.push_back("p" + std::to_string(i) + "_" + std::to_string(j));
        std::shuffle(informative.begin(), informative.end(), rng);

        const int n_inputs = std::min<int>(2, static_cast<int>(informative.size()));
        std::vector<std::string> inputs(informative.begin(), informative.begin() + n_inputs);
        const bool conjunction = n_inputs < 2 ? true : (rng() & 1u) == 0;

        std::vector<std::string> vocab = informative;
        const int n_noise = spec.features_per_vocab - static_cast<int>(vocab.size());
        for (auto& n : sample_without_replacement(noise_pool, n_noise, rng))
            vocab.push_back(std::move(n));
        std::shuffle(vocab.begin(), vocab.end(), rng);

        Dataset d;
        d.id = "ds_" + padded(i, 4);
        d.features = vocab;

        std::vector<int> input_idx, other_informative_idx, noise_idx;
        for (const auto& name : inputs) input_idx.push_back(d.feature_index(name));
        for (const auto& name : informative)
            if (std::find(inputs.begin(), inputs.end(), name) == inputs.end())
                other_informative_idx.push_back(d.feature_index(name));
        {
            std::set<int> special(input_idx.begin(), input_idx.end());
            special.insert(other_informative_idx.begin(), other_informative_idx.end());
            for (int f = 0; f < static_cast<int>(vocab.size()); ++f)
                if (!special.count(f)) noise_idx.push_back(f);
        }

        // Low noise presence keeps row patterns overlapping across datasets.
        const double noise_presence =
            noise_idx.empty() ? 0.0
                              : std::min(0.3, 2.0 / static_cast<double>(noise_idx.size()));
        std::bernoulli_distribution half(0.5);
        std::bernoulli_distribution flip(spec.label_noise_rate);
        std::bernoulli_distribution noise_on(noise_presence);

        for (int r = 0; r < spec.rows_per_dataset; ++r) {
            std::vector<int> present;
            std::vector<bool> input_vals(input_idx.size());
            for (std::size_t j = 0; j < input_idx.size(); ++j) {
                input_vals[j] = half(rng);
                if (input_vals[j]) present.push_back(input_idx[j]);
            }
            bool y0;
            if (conjunction) {
                y0 = true;
                for (bool v : input_vals) y0 = y0 && v;
            } else {
                y0 = input_vals[0] != input_vals[1];
            }
            const bool y = spec.label_noise_rate > 0.0 && flip(rng) ? !y0 : y0;
            std::bernoulli_distribution correlated(y ? 0.75 : 0.25);
            for (int idx : other_informative_idx)
                if (correlated(rng)) present.push_back(idx);
            for (int idx : noise_idx)
                if (noise_on(rng)) present.push_back(idx);
            std::sort(present.begin(), present.end());
            d.rows.push_back(DatasetRow{std::move(present), y ? 1 : 0});
        }

        d.validate();
        SynthTruth t;
        t.dataset_id = d.id;
        t.cluster = cluster;
        t.is_conjunction = conjunction;
        t.informative = informative;
        t.concept_inputs = inputs;
        coll.datasets.push_back(std::move(d));
        truth.push_back(std::move(t));
    }
    return {std::move(coll), std::move(truth)};
}

DatasetCollection generate_collection(const SynthSpec& spec) {
    return generate_collection_with_truth(spec).first;
}

}  // namespace featml

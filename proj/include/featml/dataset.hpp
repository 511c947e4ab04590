#pragma once

// Sparse binary datasets with a binary target column, their on-disk text
// format, and the synthetic collection generator used by the experiment
// harness.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace featml {

// Error raised by load_dataset / load_collection on malformed input.  The
// message carries "<path>:<line>:" so callers can point at the bad row.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// One observation: the sorted indices of features that are present (value 1)
// plus the binary target.  Indices are strictly increasing and refer to
// Dataset::features.
struct DatasetRow {
    std::vector<int> present;
    int target = 0;

    bool operator==(const DatasetRow&) const = default;
    bool has(int feature_index) const;
};

struct Dataset {
    std::string id;
    std::vector<std::string> features;  // unique names, no whitespace
    std::vector<DatasetRow> rows;       // at least one

    std::size_t n_rows() const { return rows.size(); }

    // Index of a feature name, or -1 if the dataset does not have it.
    int feature_index(const std::string& name) const;

    // Throws std::invalid_argument if any structural invariant is broken
    // (duplicate names, empty rows vector, out-of-range or unsorted indices,
    // non-binary target).
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct DatasetCollection {
    std::vector<Dataset> datasets;  // unique ids, arrival order
};

// Parameters for generate_collection.  The generator is a pure function of
// this struct: equal specs give equal collections.
struct SynthSpec {
    int n_datasets = 1;
    int n_clusters = 1;           // <= n_datasets
    int features_per_vocab = 20;  // vocabulary size of each dataset
    int rows_per_dataset = 50;
    int planted_set_size = 2;     // informative features per dataset
    double label_noise_rate = 0.0;   // [0, 1)
    double cluster_tightness = 1.0;  // [0, 1]
    std::uint64_t rng_seed = 0;
};

// Ground truth for one generated dataset, for experiment checks.
struct SynthTruth {
    std::string dataset_id;
    int cluster = 0;
    bool is_conjunction = true;            // else 2-feature XOR
    std::vector<std::string> informative;  // planted informative names
    std::vector<std::string> concept_inputs;  // the inputs of the target rule
};

// Convenience for tests and small fixtures: dense 0/1 matrix, one inner
// vector per row, plus per-row targets.
Dataset dataset_from_dense(const std::string& id,
                           std::vector<std::string> features,
                           const std::vector<std::vector<int>>& values,
                           const std::vector<int>& targets);

// Text format, one dataset per file:
//   features <name_1> ... <name_F>
//   <label> <i_1> <i_2> ...
// with strictly increasing 0-based indices, single spaces, LF line endings.
// load_dataset sets Dataset::id to the path.  Anything outside the format is
// a ParseError naming the offending line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

// All *.ds files of a directory, in lexicographic filename order, each with
// its id set to the filename stem.
DatasetCollection load_collection(const std::string& dir);

// Keeps exactly the features whose single-feature mutual information with
// the target is >= threshold, re-indexing rows.  Row count is unchanged.
// Threshold 0 keeps everything.
Dataset mi_prefilter(const Dataset& d, double mi_threshold);

DatasetCollection generate_collection(const SynthSpec& spec);
std::pair<DatasetCollection, std::vector<SynthTruth>>
generate_collection_with_truth(const SynthSpec& spec);

}  // namespace featml

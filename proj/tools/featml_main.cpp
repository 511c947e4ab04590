// Command-line front end: synthetic collection generation, dataset distance,
// single-problem feature selection, the baseline/meta experiment runner, and
// report summarization.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "featml/dataset.hpp"
#include "featml/featsearch.hpp"
#include "featml/harness.hpp"
#include "featml/metricspace.hpp"
#include "featml/num_format.hpp"

namespace fs = std::filesystem;
using featml::format_double;

namespace {

featml::SynthSpec read_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open spec file: " + path);
    const nlohmann::json j = nlohmann::json::parse(f);
    if (!j.is_object()) throw std::runtime_error(path + ": spec must be a JSON object");

    static const std::set<std::string> allowed = {
        "n_datasets",       "n_clusters",       "features_per_vocab",
        "rows_per_dataset", "planted_set_size", "label_noise_rate",
        "cluster_tightness", "rng_seed"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw std::runtime_error(path + ": unknown spec key '" + key + "'");
    }

    featml::SynthSpec s;
    s.n_datasets = j.value("n_datasets", s.n_datasets);
    s.n_clusters = j.value("n_clusters", s.n_clusters);
    s.features_per_vocab = j.value("features_per_vocab", s.features_per_vocab);
    s.rows_per_dataset = j.value("rows_per_dataset", s.rows_per_dataset);
    s.planted_set_size = j.value("planted_set_size", s.planted_set_size);
    s.label_noise_rate = j.value("label_noise_rate", s.label_noise_rate);
    s.cluster_tightness = j.value("cluster_tightness", s.cluster_tightness);
    s.rng_seed = j.value("rng_seed", s.rng_seed);
    return s;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

void cmd_gen(const std::string& spec_path, const std::string& out_dir,
             const std::string& truth_path) {
    const featml::SynthSpec spec = read_spec(spec_path);
    const auto [collection, truth] = featml::generate_collection_with_truth(spec);

    fs::create_directories(out_dir);
    for (const auto& d : collection.datasets)
        featml::save_dataset(d, (fs::path(out_dir) / (d.id + ".ds")).string());

    if (!truth_path.empty()) {
        std::ofstream f(truth_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open truth file: " + truth_path);
        f << "dataset_id,cluster,concept,inputs,informative\n";
        for (const auto& t : truth)
            f << t.dataset_id << ',' << t.cluster << ','
              << (t.is_conjunction ? "and" : "xor") << ',' << join(t.concept_inputs)
              << ',' << join(t.informative) << '\n';
    }
    std::cout << "wrote " << collection.datasets.size() << " datasets to " << out_dir
              << '\n';
}

void cmd_distance(const std::string& path_a, const std::string& path_b) {
    const featml::Dataset a = featml::load_dataset(path_a);
    const featml::Dataset b = featml::load_dataset(path_b);
    std::cout << std::fixed << std::setprecision(6) << featml::dataset_distance(a, b)
              << '\n';
}

struct SelectArgs {
    std::string data_path;
    std::vector<std::string> seed;
    std::uint64_t fe = 1000;
    int max_edit_distance = 5;
    double b = 5.0;
    double mi_threshold = 0.001;
    std::uint64_t rng_seed = 0;
    std::optional<double> target;
};

void cmd_select(const SelectArgs& args) {
    const featml::Dataset d = featml::load_dataset(args.data_path);
    const featml::Dataset filtered = featml::mi_prefilter(d, args.mi_threshold);

    featml::SearchConfig cfg;
    cfg.max_evals = args.fe;
    cfg.max_edit_distance = args.max_edit_distance;
    cfg.fitness_cfg.b = args.b;
    cfg.rng_seed = args.rng_seed;
    cfg.target = args.target;

    const featml::SearchResult res =
        featml::hillclimb(filtered, featml::FeatureSet(args.seed), cfg);
    std::cout << "selected: " << join(res.best_set.names()) << '\n'
              << "fitness: " << format_double(res.best_fitness) << '\n'
              << "evals_used: " << res.evals_used << '\n'
              << "evals_to_best: " << res.evals_to_best << '\n';
    if (args.target)
        std::cout << "target_reached: " << (res.target_reached ? "yes" : "no") << '\n';
}

struct RunArgs {
    std::string collection_dir;
    std::string mode;
    std::string report_path;
    std::string metadb_path;
    std::string targets_path;
    featml::RunConfig cfg;
};

void cmd_run(const RunArgs& args) {
    const featml::DatasetCollection collection =
        featml::load_collection(args.collection_dir);

    featml::ExperimentReport report;
    if (args.mode == "baseline") {
        featml::BaselineOutcome out = featml::run_baseline(collection, args.cfg);
        if (!args.targets_path.empty())
            featml::save_targets(out.targets, args.targets_path);
        if (!args.metadb_path.empty()) out.db.save(args.metadb_path);
        report = std::move(out.report);
    } else {
        if (args.targets_path.empty())
            throw std::runtime_error("meta mode needs --targets from a baseline run");
        const std::vector<double> targets = featml::load_targets(args.targets_path);
        featml::MetaOutcome out = featml::run_meta(collection, args.cfg, targets);
        if (!args.metadb_path.empty()) out.db.save(args.metadb_path);
        report = std::move(out.report);
    }
    featml::write_report(report, args.report_path);

    std::cout << "problems: " << report.records.size() << '\n';
    if (const auto m = report.mean_achieved_fitness(args.mode))
        std::cout << "mean_achieved_fitness: " << format_double(*m) << '\n';
    if (const auto m = report.mean_learning_score(args.mode))
        std::cout << "mean_learning_score: " << format_double(*m) << '\n';
    if (const auto m = report.arithmetic_mean_speedup())
        std::cout << "arithmetic_mean_speedup: " << format_double(*m) << '\n';
    if (const auto m = report.geometric_mean_speedup())
        std::cout << "geometric_mean_speedup: " << format_double(*m) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void cmd_report_summary(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open report: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("dataset_id,", 0) != 0)
        throw std::runtime_error(path + ": not a report file");

    std::vector<double> speedups;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv(line);
        if (fields.size() != 11)
            throw std::runtime_error(path + ": malformed report row: " + line);
        if (!fields[10].empty()) speedups.push_back(featml::parse_double(fields[10]));
    }
    if (speedups.empty()) {
        std::cout << "no speedups recorded\n";
        return;
    }
    double sum = 0.0, log_sum = 0.0;
    for (double s : speedups) {
        sum += s;
        log_sum += std::log(s);
    }
    const double n = static_cast<double>(speedups.size());
    std::cout << "arithmetic_mean_speedup: " << format_double(sum / n) << '\n'
              << "geometric_mean_speedup: " << format_double(std::exp(log_sum / n))
              << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feature metalearning toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, truth_path;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset collection");
    gen->add_option("--spec", spec_path, "generator spec (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    gen->add_option("--out", out_dir, "output directory for *.ds files")->required();
    gen->add_option("--truth", truth_path, "also write the ground-truth CSV here");
    gen->callback([&] { cmd_gen(spec_path, out_dir, truth_path); });

    std::string dist_a, dist_b;
    auto* dist = app.add_subcommand("distance", "distance between two datasets");
    dist->add_option("a", dist_a, "first dataset")->required()->check(CLI::ExistingFile);
    dist->add_option("b", dist_b, "second dataset")->required()->check(CLI::ExistingFile);
    dist->callback([&] { cmd_distance(dist_a, dist_b); });

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "feature selection on one dataset");
    select->add_option("data", sel.data_path, "dataset file")
        ->required()
        ->check(CLI::ExistingFile);
    select->add_option("--seed-features", sel.seed, "initial feature set")
        ->delimiter(',');
    select->add_option("--fe", sel.fe, "evaluation budget");
    select->add_option("--max-edit-distance", sel.max_edit_distance,
                       "neighborhood widening cap");
    select->add_option("--b", sel.b, "fitness confidence penalty");
    select->add_option("--mi-threshold", sel.mi_threshold, "prefilter threshold");
    select->add_option("--rng-seed", sel.rng_seed, "search seed");
    select->add_option("--target", sel.target, "stop once fitness reaches this");
    select->callback([&] { cmd_select(sel); });

    RunArgs run;
    auto* runc = app.add_subcommand("run", "run an experiment phase over a collection");
    runc->add_option("--collection", run.collection_dir, "dataset directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    runc->add_option("--mode", run.mode, "baseline or meta")
        ->required()
        ->check(CLI::IsMember({"baseline", "meta"}));
    runc->add_option("--report", run.report_path, "report CSV to write")->required();
    runc->add_option("--metadb", run.metadb_path, "write the grown repository here");
    runc->add_option("--targets", run.targets_path,
                     "targets file (written in baseline mode, read in meta mode)");
    runc->add_option("--fe", run.cfg.fe, "per-problem evaluation budget");
    runc->add_option("--t", run.cfg.t, "transfer threshold");
    runc->add_option("--k", run.cfg.k, "neighbors consulted");
    runc->add_option("--b", run.cfg.b, "fitness confidence penalty");
    runc->add_option("--mi-threshold", run.cfg.mi_threshold, "prefilter threshold");
    runc->add_option("--learn-evals", run.cfg.learn_evals, "rule-learning budget");
    runc->add_option("--quality-p", run.cfg.quality_p, "quality weighting exponent");
    runc->add_option("--rng-seed", run.cfg.rng_seed, "experiment seed");
    runc->callback([&] {
        run.cfg.collection_dir = run.collection_dir;
        run.cfg.metadb_path = run.metadb_path;
        cmd_run(run);
    });

    std::string report_path;
    auto* summary = app.add_subcommand("report-summary", "print a report's speedup means");
    summary->add_option("report", report_path, "report CSV")
        ->required()
        ->check(CLI::ExistingFile);
    summary->callback([&] { cmd_report_summary(report_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

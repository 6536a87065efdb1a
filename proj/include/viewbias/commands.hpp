#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viewbias/manifest.hpp"

// Subcommand bodies of the viewbias tool. Each writes its declared outputs
// plus a RunManifest and returns it; failures throw viewbias::Error.
namespace viewbias::cli {

struct SynthOptions {
    std::string profile;
    size_t count = 1000;
    uint64_t seed = 0;
    std::string out;
};

struct AnalyzeOptions {
    std::vector<std::string> inputs;
    std::string out_dir;
    int azimuth_bins = 36;
    int elevation_bins = 18;
    // A feature mode name, or "all".
    std::string features = "body-centered+size-normalized";
};

struct ClusterOptions {
    std::vector<std::string> inputs;
    int k = 100;
    uint64_t seed = 0;
    std::string scope = "global";
    std::string out;
};

struct TrainOptions {
    std::string train_file;
    std::optional<std::string> clusters;
    std::string mode = "C"; // C, R, C+R or baseline
    double lambda = 0.5;
    uint64_t seed = 0;
    int epochs = 25;
    size_t batch_size = 128;
    double learning_rate = 1e-3;
    std::vector<int> hidden = {256, 256};
    bool canonical_head = false;
    double class_sign = 1.0;
    std::string out;
    std::string loss_csv; // defaults to <out>.loss.csv
};

struct EvalCommandOptions {
    std::string checkpoint;
    std::vector<std::string> tests;
    std::string out;
    std::string train_name;       // defaults to the checkpoint file stem
    std::optional<std::string> by_view_dir;
    double pck_threshold = 150.0;
    std::string pck_mode = "joint"; // joint or pose
    std::string alignment = "similarity";
    int azimuth_bins = 36;
    int elevation_bins = 18;
};

struct AblateOptions {
    std::string train_file;
    std::vector<std::string> tests;
    std::vector<std::string> cluster_inputs; // defaults to train + tests
    std::vector<std::string> experiments = {"k-sweep", "restarts", "variants"};
    std::vector<int> ks = {10, 24, 50, 100, 200, 500};
    int k = 100;
    int restarts = 4;
    double lambda = 0.5;
    uint64_t seed = 0;
    int epochs = 25;
    size_t batch_size = 128;
    std::vector<int> hidden = {256, 256};
    std::string out;
};

RunManifest cmd_synth(const SynthOptions &options);
RunManifest cmd_analyze(const AnalyzeOptions &options);
RunManifest cmd_cluster(const ClusterOptions &options);
RunManifest cmd_train(const TrainOptions &options);
RunManifest cmd_eval(const EvalCommandOptions &options);
RunManifest cmd_ablate(const AblateOptions &options);

std::string ablation_csv_header();

// Lowercase, filesystem-safe form of a dataset tag.
std::string file_tag(const std::string &name);
std::vector<int> parse_int_list(const std::string &text);

} // namespace viewbias::cli

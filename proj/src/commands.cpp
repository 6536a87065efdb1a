#include "viewbias/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "viewbias/analysis.hpp"
#include "viewbias/error.hpp"
#include "viewbias/record_io.hpp"
#include "viewbias/synth.hpp"
#include "viewbias/toy_net.hpp"
#include "viewbias/view_cluster.hpp"

namespace fs = std::filesystem;

namespace viewbias::cli {

namespace {

std::vector<PoseRecord> read_nonempty(const std::string &path) {
    auto records = read_jsonl_file(path);
    if (records.empty()) throw Error(ErrorCode::kEmptyInput, path + ": no records");
    return records;
}

std::ofstream open_out(const std::string &path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
    return out;
}

void close_checked(std::ofstream &out, const std::string &path) {
    out.close();
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::string manifest_path_for(const std::string &out) { return out + ".manifest.json"; }

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// Records grouped by dataset tag, in order of first appearance.
std::vector<std::pair<std::string, std::vector<PoseRecord>>> group_by_dataset(
    const std::vector<PoseRecord> &records) {
    std::vector<std::pair<std::string, std::vector<PoseRecord>>> groups;
    std::map<std::string, size_t> slot;
    for (const auto &r : records) {
        auto [it, fresh] = slot.emplace(r.dataset, groups.size());
        if (fresh) groups.emplace_back(r.dataset, std::vector<PoseRecord>{});
        groups[it->second].second.push_back(r);
    }
    return groups;
}

std::map<std::string, std::vector<Quaternion>> quaternions_by_dataset(const std::vector<std::string> &paths,
                                                                      RunManifest *manifest) {
    std::map<std::string, std::vector<Quaternion>> out;
    for (const auto &path : paths) {
        if (manifest) manifest->add_input(path);
        for (const auto &r : read_nonempty(path)) {
            try {
                out[r.dataset].push_back(compute_body_frame(r.pose3d).q);
            } catch (const Error &e) {
                if (e.code() != ErrorCode::kDegenerateFrame) throw;
            }
        }
    }
    return out;
}

LossWeights weights_for(const std::string &mode, double lambda, double class_sign) {
    LossWeights w;
    w.class_sign = class_sign;
    if (mode == "baseline") {
        w.lambda_q = 0.0;
    } else {
        w.mode = parse_view_loss_mode(mode);
        w.lambda_q = lambda;
    }
    w.validate();
    return w;
}

bool needs_clusters(const LossWeights &w) {
    return w.lambda_q != 0.0 && w.mode != ViewLossMode::kRegression;
}

void relabel(std::vector<Sample> &samples, const ClusterModel *model) {
    for (auto &s : samples) s.c_star = model ? assign(*model, s.q_star) : -1;
}

std::string join(const std::vector<int> &v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

} // namespace

std::string file_tag(const std::string &name) {
    std::string out;
    for (char c : name) {
        const auto uc = static_cast<unsigned char>(c);
        out += (std::isalnum(uc) || c == '-' || c == '_') ? static_cast<char>(std::tolower(uc)) : '_';
    }
    return out.empty() ? "unnamed" : out;
}

std::vector<int> parse_int_list(const std::string &text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception &) {
            throw Error(ErrorCode::kInvalidArgument, "not an integer list: " + text);
        }
    }
    if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty integer list");
    return out;
}

// ---------------------------------------------------------------------------

RunManifest cmd_synth(const SynthOptions &o) {
    Stopwatch clock;
    if (o.count < 1) throw Error(ErrorCode::kInvalidArgument, "--count must be at least 1");
    SynthConfig config;
    config.profile = builtin_profile(o.profile);
    config.count = o.count;
    config.seed = o.seed;
    const auto records = generate(config);
    write_jsonl_file(o.out, records);

    // Re-read as validation of the written file.
    if (read_jsonl_file(o.out).size() != o.count) throw Error(ErrorCode::kIo, "short write: " + o.out);

    RunManifest m;
    m.command = "synth";
    m.config = {{"profile", o.profile}, {"count", o.count}, {"seed", o.seed}, {"out", o.out}};
    m.seeds = {o.seed};
    m.add_output(o.out);
    m.wall_time_s = clock.seconds();
    m.write(manifest_path_for(o.out));
    return m;
}

RunManifest cmd_analyze(const AnalyzeOptions &o) {
    Stopwatch clock;
    if (o.inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "analyze needs at least one input");
    std::vector<FeatureMode> modes;
    if (o.features == "all") {
        modes = all_feature_modes();
    } else {
        modes = {parse_feature_mode(o.features)};
    }

    RunManifest m;
    m.command = "analyze";
    m.config = {{"inputs", o.inputs},
                {"out_dir", o.out_dir},
                {"azimuth_bins", o.azimuth_bins},
                {"elevation_bins", o.elevation_bins},
                {"features", o.features}};

    std::vector<PoseRecord> all;
    for (const auto &path : o.inputs) {
        auto records = read_nonempty(path);
        m.add_input(path);
        all.insert(all.end(), records.begin(), records.end());
    }
    const auto groups = group_by_dataset(all);
    fs::create_directories(o.out_dir);

    const std::string stats_path = (fs::path(o.out_dir) / "stats.csv").string();
    {
        auto out = open_out(stats_path);
        out << stats_csv_header() << '\n';
        for (const auto &[name, records] : groups) {
            DatasetStats s = compute_stats(records);
            s.dataset = name;
            out << stats_csv_row(s) << '\n';
        }
        close_checked(out, stats_path);
    }
    m.add_output(stats_path);

    for (const auto &[name, records] : groups) {
        const ViewHistogram h = view_histogram(records, o.azimuth_bins, o.elevation_bins);
        size_t total = 0;
        for (auto c : h.azimuth.counts) total += c;
        if (total + h.skipped != records.size()) {
            throw Error(ErrorCode::kIo, "histogram lost records for " + name);
        }
        const auto base = fs::path(o.out_dir) / ("histogram_" + file_tag(name));
        for (const auto &[suffix, axis] : {std::pair<std::string, const HistogramAxis *>{"_azimuth.csv", &h.azimuth},
                                           {"_elevation.csv", &h.elevation}}) {
            const std::string path = base.string() + suffix;
            auto out = open_out(path);
            write_histogram_csv(out, *axis);
            close_checked(out, path);
            m.add_output(path);
        }
    }

    for (FeatureMode mode : modes) {
        const std::string path = (fs::path(o.out_dir) / ("features_" + file_tag(to_string(mode)) + ".csv")).string();
        auto out = open_out(path);
        write_feature_csv(out, export_pose_features(all, mode));
        close_checked(out, path);
        m.add_output(path);
    }

    m.wall_time_s = clock.seconds();
    m.write((fs::path(o.out_dir) / "manifest.json").string());
    return m;
}

RunManifest cmd_cluster(const ClusterOptions &o) {
    Stopwatch clock;
    if (o.inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "cluster needs at least one input");
    RunManifest m;
    m.command = "cluster";
    m.config = {{"inputs", o.inputs}, {"k", o.k}, {"seed", o.seed}, {"scope", o.scope}, {"out", o.out}};
    m.seeds = {o.seed};
    const auto quats = quaternions_by_dataset(o.inputs, &m);
    const ClusterModel model = fit_scoped(quats, o.k, o.seed, o.scope);
    write_cluster_model(o.out, model);
    if (read_cluster_model(o.out).centers.size() != static_cast<size_t>(o.k)) {
        throw Error(ErrorCode::kIo, "cluster model did not round-trip: " + o.out);
    }
    m.add_output(o.out);
    m.wall_time_s = clock.seconds();
    m.write(manifest_path_for(o.out));
    return m;
}

RunManifest cmd_train(const TrainOptions &o) {
    Stopwatch clock;
    TrainConfig config;
    config.weights = weights_for(o.mode, o.lambda, o.class_sign);
    config.epochs = o.epochs;
    config.batch_size = o.batch_size;
    config.adam.learning_rate = o.learning_rate;
    config.seed = o.seed;
    config.validate();

    RunManifest m;
    m.command = "train";
    m.seeds = {o.seed};

    std::optional<ClusterModel> clusters;
    if (o.clusters) {
        clusters = read_cluster_model(*o.clusters);
        m.add_input(*o.clusters);
    } else if (needs_clusters(config.weights)) {
        throw Error(ErrorCode::kMissingClusterModel, "mode " + o.mode + " needs --clusters");
    }

    const auto records = read_nonempty(o.train_file);
    m.add_input(o.train_file);
    const auto prepared = prepare_samples(records, clusters ? &*clusters : nullptr);
    if (prepared.samples.empty()) throw Error(ErrorCode::kEmptyInput, "no usable training records");

    ToyNetConfig net_config;
    net_config.hidden = o.hidden;
    net_config.canonical_head = o.canonical_head;
    net_config.seed = o.seed;
    const TrainResult result = train(ToyNet(net_config), prepared.samples, config, clusters ? &*clusters : nullptr);

    nlohmann::json snapshot = config.to_json();
    snapshot["mode"] = o.mode;
    snapshot["hidden"] = o.hidden;
    snapshot["canonical_head"] = o.canonical_head;
    const std::string config_hash = sha256_string(snapshot.dump()).substr(0, 16);

    write_checkpoint(o.out, result.net, config_hash);
    read_checkpoint(o.out);

    const std::string loss_path = o.loss_csv.empty() ? o.out + ".loss.csv" : o.loss_csv;
    {
        auto out = open_out(loss_path);
        out << "epoch,loss,L_pose,L_q\n";
        for (const auto &e : result.curve) {
            out << e.epoch << ',' << fmt("%.9g", e.loss) << ',' << fmt("%.9g", e.pose) << ',' << fmt("%.9g", e.view)
                << '\n';
        }
        close_checked(out, loss_path);
    }

    snapshot["train_file"] = o.train_file;
    snapshot["clusters"] = o.clusters ? nlohmann::json(*o.clusters) : nlohmann::json(nullptr);
    snapshot["skipped_records"] = prepared.skipped;
    m.config = snapshot;
    m.add_output(o.out);
    m.add_output(loss_path);
    m.wall_time_s = clock.seconds();
    m.write(manifest_path_for(o.out));
    return m;
}

RunManifest cmd_eval(const EvalCommandOptions &o) {
    Stopwatch clock;
    if (o.tests.empty()) throw Error(ErrorCode::kInvalidArgument, "eval needs at least one test file");
    EvalOptions options;
    options.pck_threshold = o.pck_threshold;
    if (o.pck_mode == "joint") {
        options.pck_mode = PckMode::kPerJoint;
    } else if (o.pck_mode == "pose") {
        options.pck_mode = PckMode::kPerPose;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "--pck-mode must be joint or pose");
    }
    if (o.alignment == "similarity") {
        options.alignment = AlignmentKind::kSimilarity;
    } else if (o.alignment == "rigid") {
        options.alignment = AlignmentKind::kRigid;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "--alignment must be similarity or rigid");
    }

    RunManifest m;
    m.command = "eval";
    m.config = {{"checkpoint", o.checkpoint}, {"tests", o.tests},         {"out", o.out},
                {"pck_threshold", o.pck_threshold}, {"pck_mode", o.pck_mode}, {"alignment", o.alignment},
                {"by_view", o.by_view_dir ? nlohmann::json(*o.by_view_dir) : nlohmann::json(nullptr)}};
    const ToyNet net = read_checkpoint(o.checkpoint);
    m.add_input(o.checkpoint);
    const std::string train_name = o.train_name.empty() ? fs::path(o.checkpoint).stem().string() : o.train_name;

    std::vector<std::string> rows;
    std::vector<std::string> by_view_paths;
    for (const auto &path : o.tests) {
        const auto records = read_nonempty(path);
        m.add_input(path);
        const auto prepared = prepare_samples(records, nullptr);
        if (prepared.samples.empty()) throw Error(ErrorCode::kEmptyInput, path + ": no usable records");
        const std::string test_name = records.front().dataset;
        rows.push_back(eval_csv_row(train_name, test_name, evaluate(net, prepared.samples, options)));

        if (o.by_view_dir) {
            std::vector<ViewError> errors;
            for (const auto &p : predict(net, prepared.samples)) errors.push_back({p.view, mpjpe(p.pose, p.target)});
            const auto bins = error_by_viewpoint(errors, o.azimuth_bins, o.elevation_bins);
            const auto base = fs::path(*o.by_view_dir) / (file_tag(train_name) + "__" + file_tag(test_name));
            for (const auto &[suffix, b] : {std::pair<std::string, const BinnedError *>{"_azimuth.csv", &bins.azimuth},
                                            {"_elevation.csv", &bins.elevation}}) {
                const std::string out_path = base.string() + suffix;
                auto out = open_out(out_path);
                write_binned_error_csv(out, *b);
                close_checked(out, out_path);
                by_view_paths.push_back(out_path);
            }
        }
    }

    {
        auto out = open_out(o.out);
        out << eval_csv_header() << '\n';
        for (const auto &r : rows) out << r << '\n';
        close_checked(out, o.out);
    }
    m.add_output(o.out);
    for (const auto &p : by_view_paths) m.add_output(p);
    m.wall_time_s = clock.seconds();
    m.write(manifest_path_for(o.out));
    return m;
}

// ---------------------------------------------------------------------------

std::string ablation_csv_header() {
    return "experiment,variant,mode,lambda,k,scope,cluster_seed,train_seed,third_head,test_set,count,mpjpe_mm,"
           "pa_mpjpe_mm,pck3d";
}

namespace {

struct AblationRun {
    std::string experiment;
    std::string variant;
    std::string mode = "C";
    double lambda = 0.5;
    int k = 100;
    std::string scope = "global";
    uint64_t cluster_seed = 0;
    bool third_head = false;
};

struct AblationContext {
    const AblateOptions *options = nullptr;
    std::vector<Sample> train;
    std::vector<Sample> test;
    std::map<std::string, std::vector<Quaternion>> quats;
    std::string test_name;
};

std::string run_ablation(AblationContext &ctx, const AblationRun &run, EvalReport *report_out) {
    const AblateOptions &o = *ctx.options;
    const LossWeights weights = weights_for(run.mode, run.lambda, 1.0);
    std::optional<ClusterModel> clusters;
    if (needs_clusters(weights)) clusters = fit_scoped(ctx.quats, run.k, run.cluster_seed, run.scope);
    relabel(ctx.train, clusters ? &*clusters : nullptr);

    TrainConfig config;
    config.weights = weights;
    config.epochs = o.epochs;
    config.batch_size = o.batch_size;
    config.seed = o.seed;
    ToyNetConfig net_config;
    net_config.hidden = o.hidden;
    net_config.canonical_head = run.third_head;
    net_config.seed = o.seed;
    const TrainResult result = train(ToyNet(net_config), ctx.train, config, clusters ? &*clusters : nullptr);
    const EvalReport report = evaluate(result.net, ctx.test);
    if (report_out) *report_out = report;

    const bool clustered = clusters.has_value();
    std::string row = run.experiment + "," + run.variant + "," + run.mode + "," + fmt("%g", run.lambda) + ",";
    row += (clustered ? std::to_string(run.k) : "") + ",";
    row += (clustered ? run.scope : "") + ",";
    row += (clustered ? std::to_string(run.cluster_seed) : "") + ",";
    row += std::to_string(o.seed) + "," + (run.third_head ? "true" : "false") + ",";
    row += ctx.test_name + "," + std::to_string(report.count) + "," + fmt("%.4f", report.mpjpe_mm) + "," +
           fmt("%.4f", report.pa_mpjpe_mm) + "," + fmt("%.6f", report.pck3d);
    return row;
}

} // namespace

RunManifest cmd_ablate(const AblateOptions &o) {
    Stopwatch clock;
    if (o.tests.empty()) throw Error(ErrorCode::kInvalidArgument, "ablate needs at least one test file");
    for (const auto &e : o.experiments) {
        if (e != "k-sweep" && e != "restarts" && e != "variants") {
            throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + e + "' (k-sweep, restarts, variants)");
        }
    }
    if (o.restarts < 1) throw Error(ErrorCode::kInvalidArgument, "--restarts must be at least 1");

    RunManifest m;
    m.command = "ablate";
    m.seeds = {o.seed};

    AblationContext ctx;
    ctx.options = &o;
    const auto train_records = read_nonempty(o.train_file);
    m.add_input(o.train_file);
    ctx.train = prepare_samples(train_records, nullptr).samples;
    const std::string train_dataset = train_records.front().dataset;

    std::vector<std::string> test_names;
    for (const auto &path : o.tests) {
        const auto records = read_nonempty(path);
        m.add_input(path);
        auto samples = prepare_samples(records, nullptr).samples;
        ctx.test.insert(ctx.test.end(), samples.begin(), samples.end());
        test_names.push_back(records.front().dataset);
    }
    for (size_t i = 0; i < test_names.size(); ++i) ctx.test_name += (i ? "+" : "") + test_names[i];

    std::vector<std::string> cluster_paths = o.cluster_inputs;
    if (cluster_paths.empty()) {
        cluster_paths.push_back(o.train_file);
        cluster_paths.insert(cluster_paths.end(), o.tests.begin(), o.tests.end());
    } else {
        for (const auto &p : cluster_paths) m.add_input(p);
    }
    ctx.quats = quaternions_by_dataset(cluster_paths, nullptr);

    m.config = {{"train", o.train_file},   {"tests", o.tests},       {"cluster_inputs", cluster_paths},
                {"experiments", o.experiments}, {"ks", o.ks},        {"k", o.k},
                {"restarts", o.restarts}, {"lambda", o.lambda},     {"seed", o.seed},
                {"epochs", o.epochs},     {"batch", o.batch_size},   {"hidden", join(o.hidden)}};

    std::vector<std::string> rows;
    auto has = [&](const std::string &e) {
        return std::find(o.experiments.begin(), o.experiments.end(), e) != o.experiments.end();
    };

    if (has("k-sweep")) {
        for (int k : o.ks) {
            AblationRun run;
            run.experiment = "k-sweep";
            run.variant = "C";
            run.lambda = o.lambda;
            run.k = k;
            run.cluster_seed = o.seed;
            rows.push_back(run_ablation(ctx, run, nullptr));
        }
    }

    if (has("restarts")) {
        std::vector<EvalReport> reports;
        for (int r = 0; r < o.restarts; ++r) {
            AblationRun run;
            run.experiment = "restarts";
            run.variant = "C";
            run.lambda = o.lambda;
            run.k = o.k;
            run.cluster_seed = o.seed + static_cast<uint64_t>(r);
            EvalReport report;
            rows.push_back(run_ablation(ctx, run, &report));
            reports.push_back(report);
        }
        // Summary rows: mean over restarts, then max - min.
        auto summarize = [&](const std::string &variant, auto reduce) {
            const double mp = reduce([](const EvalReport &e) { return e.mpjpe_mm; });
            const double pa = reduce([](const EvalReport &e) { return e.pa_mpjpe_mm; });
            const double pck = reduce([](const EvalReport &e) { return e.pck3d; });
            rows.push_back("restarts," + variant + ",C," + fmt("%g", o.lambda) + "," + std::to_string(o.k) +
                           ",global,," + std::to_string(o.seed) + ",false," + ctx.test_name + "," +
                           std::to_string(reports.front().count) + "," + fmt("%.4f", mp) + "," + fmt("%.4f", pa) +
                           "," + fmt("%.6f", pck));
        };
        summarize("mean", [&](auto field) {
            double s = 0.0;
            for (const auto &e : reports) s += field(e);
            return s / static_cast<double>(reports.size());
        });
        summarize("spread", [&](auto field) {
            double lo = field(reports.front()), hi = lo;
            for (const auto &e : reports) {
                lo = std::min(lo, field(e));
                hi = std::max(hi, field(e));
            }
            return hi - lo;
        });
    }

    if (has("variants")) {
        const std::vector<AblationRun> runs = {
            {"variants", "baseline", "baseline", 0.0, o.k, "global", o.seed, false},
            {"variants", "C", "C", o.lambda, o.k, "global", o.seed, false},
            {"variants", "R", "R", o.lambda, o.k, "global", o.seed, false},
            {"variants", "C+R", "C+R", o.lambda, o.k, "global", o.seed, false},
            {"variants", "local", "C", o.lambda, o.k, "local:" + train_dataset, o.seed, false},
            {"variants", "canonical", "C", o.lambda, o.k, "global", o.seed, true},
        };
        for (const auto &run : runs) rows.push_back(run_ablation(ctx, run, nullptr));
    }

    {
        auto out = open_out(o.out);
        out << ablation_csv_header() << '\n';
        for (const auto &r : rows) out << r << '\n';
        close_checked(out, o.out);
    }
    m.add_output(o.out);
    m.wall_time_s = clock.seconds();
    m.write(manifest_path_for(o.out));
    return m;
}

} // namespace viewbias::cli

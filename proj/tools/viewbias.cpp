#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "viewbias/commands.hpp"
#include "viewbias/error.hpp"
#include "viewbias/synth.hpp"

using namespace viewbias;

namespace {

const char *kFormats = R"(Formats:
  records   JSONL, one object per line:
            {"dataset": str, "subject": str, "frame": int,
             "intrinsics": {"fx","fy","cx","cy"},
             "joints3d": [[x,y,z] x 14] (camera frame, mm; a null pelvis is
                         replaced by the hip midpoint),
             "joints2d": optional [[u,v] x 14] (pixels),
             "pelvis_synthesized": bool}
            joint order: pelvis neck head l_shoulder r_shoulder l_elbow
            r_elbow l_wrist r_wrist l_hip r_hip l_knee r_knee l_ankle
  clusters  JSON {"k","seed","scope","inertia","centers": [[w,x,y,z] x k]}
  checkpoint JSON {"format","layer_sizes","canonical_head","z_max","bins",
            "config_hash","params"}
  manifest  every command writes <out>.manifest.json (analyze: <dir>/manifest.json)
            with command, config, seeds, input/output paths, sha256, wall time
)";

std::string join_names() {
    std::string s;
    for (const auto &n : builtin_profile_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Body-centered viewpoint analysis, clustering and multi-task pose training."};
    app.footer(kFormats);
    app.require_subcommand(1);

    // synth
    cli::SynthOptions synth;
    auto *s = app.add_subcommand("synth", "Generate synthetic pose records from a bias profile.");
    s->add_option("--profile", synth.profile, "Profile: " + join_names())->required();
    s->add_option("--count", synth.count, "Number of records")->default_val(1000);
    s->add_option("--seed", synth.seed, "Random seed")->default_val(0);
    s->add_option("--out", synth.out, "Output JSONL path")->required();
    s->footer("Writes one record per line in the records format and <out>.manifest.json.");

    // analyze
    cli::AnalyzeOptions analyze;
    auto *a = app.add_subcommand("analyze", "Dataset statistics, viewpoint histograms and pose features.");
    a->add_option("inputs", analyze.inputs, "Record JSONL files")->required();
    a->add_option("--out-dir", analyze.out_dir, "Output directory")->required();
    a->add_option("--azimuth-bins", analyze.azimuth_bins)->default_val(36);
    a->add_option("--elevation-bins", analyze.elevation_bins)->default_val(18);
    a->add_option("--features", analyze.features,
                  "root-relative, root-relative+size-normalized, body-centered, "
                  "body-centered+size-normalized or all")
        ->default_val(analyze.features);
    a->footer("Outputs in --out-dir:\n"
              "  stats.csv  dataset,count,camera_distance_mean_m,camera_distance_std_m,focal_length_mean,\n"
              "             focal_length_std,bone_length_mean_m,bone_length_std_m (one row per dataset tag)\n"
              "  histogram_<dataset>_{azimuth,elevation}.csv  bin_start,bin_end,count\n"
              "  features_<mode>.csv  dataset,<joint>_<axis> x 42 (mm)\n"
              "  manifest.json");

    // cluster
    cli::ClusterOptions cluster;
    auto *c = app.add_subcommand("cluster", "Fit k-means over viewpoint quaternions.");
    c->add_option("inputs", cluster.inputs, "Record JSONL files")->required();
    c->add_option("--k", cluster.k, "Number of clusters")->default_val(100);
    c->add_option("--seed", cluster.seed)->default_val(0);
    c->add_option("--scope", cluster.scope, "global, or local:<dataset>")->default_val("global");
    c->add_option("--out", cluster.out, "Cluster model JSON")->required();

    // train
    cli::TrainOptions train;
    std::string hidden = "256,256";
    std::string clusters_path;
    auto *t = app.add_subcommand("train", "Train the keypoint-to-pose network with a viewpoint loss.");
    t->add_option("--train", train.train_file, "Training record JSONL")->required();
    t->add_option("--clusters", clusters_path, "Cluster model JSON (required by C and C+R)");
    t->add_option("--mode", train.mode, "C, R, C+R or baseline (lambda 0)")
        ->default_val("C")
        ->check(CLI::IsMember({"C", "R", "C+R", "baseline"}));
    t->add_option("--lambda", train.lambda, "Viewpoint loss weight")->default_val(0.5);
    t->add_option("--seed", train.seed)->default_val(0);
    t->add_option("--epochs", train.epochs)->default_val(25);
    t->add_option("--batch", train.batch_size)->default_val(128);
    t->add_option("--lr", train.learning_rate)->default_val(1e-3);
    t->add_option("--hidden", hidden, "Hidden layer widths")->default_val(hidden);
    t->add_flag("--canonical-head", train.canonical_head, "Add the body-frame pose head");
    t->add_option("--class-sign", train.class_sign, "Sign of the class scores, +1 or -1")->default_val(1.0);
    t->add_option("--out", train.out, "Checkpoint JSON")->required();
    t->add_option("--loss-csv", train.loss_csv, "Loss curve CSV (default <out>.loss.csv)");
    t->footer("Loss curve columns: epoch,loss,L_pose,L_q (epoch means; pose L1 in depth-codec grid units).");

    // eval
    cli::EvalCommandOptions eval;
    std::string by_view;
    auto *e = app.add_subcommand("eval", "Evaluate a checkpoint on test record files.");
    e->add_option("--checkpoint", eval.checkpoint)->required();
    e->add_option("tests", eval.tests, "Test record JSONL files")->required();
    e->add_option("--out", eval.out, "Report CSV")->required();
    e->add_option("--train-name", eval.train_name, "train_set column (default checkpoint stem)");
    e->add_option("--by-view", by_view, "Directory for per-viewpoint-bin error files");
    e->add_option("--pck-threshold", eval.pck_threshold)->default_val(150.0);
    e->add_option("--pck-mode", eval.pck_mode)->default_val("joint")->check(CLI::IsMember({"joint", "pose"}));
    e->add_option("--alignment", eval.alignment)
        ->default_val("similarity")
        ->check(CLI::IsMember({"similarity", "rigid"}));
    e->footer("Report columns: train_set,test_set,count,mpjpe_mm,pa_mpjpe_mm,pck3d (one row per test file).\n"
              "--by-view writes <train>__<test>_{azimuth,elevation}.csv with\n"
              "bin_start,bin_end,count,mean_error_mm (blank for empty bins).");

    // ablate
    cli::AblateOptions ablate;
    std::string ks = "10,24,50,100,200,500";
    std::string ablate_hidden = "256,256";
    auto *b = app.add_subcommand("ablate", "Cluster-count, k-means restart and loss-variant ablations.");
    b->add_option("--train", ablate.train_file)->required();
    b->add_option("tests", ablate.tests, "Test record JSONL files (pooled)")->required();
    b->add_option("--cluster-inputs", ablate.cluster_inputs, "Records for clustering (default train + tests)");
    b->add_option("--experiments", ablate.experiments, "k-sweep, restarts, variants")
        ->default_str("k-sweep restarts variants");
    b->add_option("--ks", ks, "k values of the sweep")->default_val(ks);
    b->add_option("--k", ablate.k, "k for restarts and variants")->default_val(100);
    b->add_option("--restarts", ablate.restarts)->default_val(4);
    b->add_option("--lambda", ablate.lambda)->default_val(0.5);
    b->add_option("--seed", ablate.seed)->default_val(0);
    b->add_option("--epochs", ablate.epochs)->default_val(25);
    b->add_option("--batch", ablate.batch_size)->default_val(128);
    b->add_option("--hidden", ablate_hidden)->default_val(ablate_hidden);
    b->add_option("--out", ablate.out, "Ablation CSV")->required();
    b->footer("Columns: " + cli::ablation_csv_header() +
              "\nrestarts adds 'mean' and 'spread' (max - min) rows; variants are baseline, C, R, C+R,\n"
              "local (clusters of the training dataset only) and canonical (third-head=true).");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*s) {
            cli::cmd_synth(synth);
        } else if (*a) {
            cli::cmd_analyze(analyze);
        } else if (*c) {
            cli::cmd_cluster(cluster);
        } else if (*t) {
            train.hidden = cli::parse_int_list(hidden);
            if (!clusters_path.empty()) train.clusters = clusters_path;
            cli::cmd_train(train);
        } else if (*e) {
            if (!by_view.empty()) eval.by_view_dir = by_view;
            cli::cmd_eval(eval);
        } else if (*b) {
            ablate.ks = cli::parse_int_list(ks);
            ablate.hidden = cli::parse_int_list(ablate_hidden);
            cli::cmd_ablate(ablate);
        }
    } catch (const Error &err) {
        std::cerr << "viewbias: " << err.what() << '\n';
        return 1;
    } catch (const std::exception &err) {
        std::cerr << "viewbias: " << err.what() << '\n';
        return 1;
    }
    return 0;
}

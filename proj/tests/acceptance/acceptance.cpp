// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "../support.hpp"
#include "viewbias/analysis.hpp"
#include "viewbias/commands.hpp"
#include "viewbias/error.hpp"
#include "viewbias/heads_losses.hpp"
#include "viewbias/manifest.hpp"
#include "viewbias/metrics.hpp"
#include "viewbias/record_io.hpp"
#include "viewbias/synth.hpp"
#include "viewbias/toy_net.hpp"
#include "viewbias/view_cluster.hpp"

namespace fs = std::filesystem;
using namespace viewbias;
using namespace testing;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Pose transform(const Pose &p, double s, const Eigen::Matrix3d &R, const Eigen::Vector3d &t) {
    Pose out;
    for (int j = 0; j < kNumJoints; ++j) out[j] = s * R * p[j] + t;
    return out;
}

std::vector<PoseRecord> synth(const std::string &profile, size_t n, uint64_t seed,
                              const PosePoolParams &pool = {}) {
    SynthConfig c;
    c.profile = builtin_profile(profile);
    c.count = n;
    c.seed = seed;
    c.pool = pool;
    return generate(c);
}

Quaternion random_unit(Rng &rng) {
    return Quaternion(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
}

// ---------------------------------------------------------------------------

void geometry(Outcome &o) {
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst_round = 0.0, worst_ortho = 0.0, worst_equi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Eigen::Matrix3d R = random_rotation(rng);
        worst_round = std::max(worst_round, (quaternion_to_rotation(rotation_to_quaternion(R)) - R).norm());
    }
    for (int i = 0; i < 2000; ++i) {
        const Pose p = random_pose(rng);
        const BodyFrame f = compute_body_frame(p);
        const Eigen::Matrix3d M = f.rotation();
        worst_ortho = std::max(worst_ortho, (M.transpose() * M - Eigen::Matrix3d::Identity()).norm());
        worst_ortho = std::max(worst_ortho, std::abs(M.determinant() - 1.0));

        const Eigen::Matrix3d R = random_rotation(rng);
        const BodyFrame g = compute_body_frame(transform(p, 1.0, R, random_vec(rng, 100)));
        worst_equi = std::max({worst_equi, (g.right - R * f.right).norm(), (g.up - R * f.up).norm(),
                               (g.front - R * f.front).norm(), (g.rotation() - R * M).norm()});
    }
    const Pose up = upright_pose();
    const BodyFrame uf = compute_body_frame(up);
    const Viewpoint v = viewpoint_from_frame(uf, up[kPelvis]);
    const double q_err = (uf.q - Quaternion(1, 0, 0, 0)).cwiseAbs().maxCoeff();
    const double s = seconds_since(t0);

    o.detail << "round-trip " << worst_round << ", orthonormality " << worst_ortho << ", equivariance "
             << worst_equi << ", upright q err " << q_err << ", view (" << v.azimuth_deg << ", "
             << v.elevation_deg << "), " << s << " s";
    o.require(worst_round < 1e-9, "round-trip");
    o.require(worst_ortho < 1e-9, "orthonormality");
    o.require(worst_equi < 1e-9, "equivariance");
    o.require(q_err < 1e-9, "upright quaternion");
    o.require(std::abs(v.azimuth_deg) < 1e-9 && std::abs(v.elevation_deg) < 1e-9, "upright viewpoint");
    o.require(s < 10.0, "runtime");
}

void metric_oracles(Outcome &o) {
    Rng rng(202);
    double worst_pa = 0.0;
    size_t pa_above = 0;
    for (int i = 0; i < 1000; ++i) {
        const Pose gt = root_relative(random_pose(rng));
        const Pose pred = transform(gt, rng.uniform(0.5, 2.0), random_rotation(rng), random_vec(rng, 200));
        worst_pa = std::max(worst_pa, pa_mpjpe(pred, gt));
        const Pose a = root_relative(random_pose(rng)), b = root_relative(random_pose(rng));
        pa_above += pa_mpjpe(a, b) > mpjpe(a, b);
    }

    // Brute-force PCK count over several thresholds.
    std::vector<Pose> preds, gts;
    for (int i = 0; i < 500; ++i) {
        const Pose g = root_relative(random_pose(rng));
        Pose p = g;
        for (auto &j : p.joints) j += random_vec(rng, 90);
        gts.push_back(g);
        preds.push_back(p);
    }
    bool pck_exact = true;
    for (double thr : {25.0, 75.0, 150.0, 300.0}) {
        size_t hits = 0;
        for (size_t i = 0; i < gts.size(); ++i)
            for (int j = 0; j < kNumJoints; ++j) {
                const Eigen::Vector3d d = preds[i][j] - gts[i][j];
                hits += std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()) < thr;
            }
        pck_exact = pck_exact && pck3d(preds, gts, thr) == static_cast<double>(hits) / (gts.size() * kNumJoints);
    }

    const Pose base = random_pose(rng);
    Pose off = base;
    off[5] += Eigen::Vector3d(3, 4, 0);
    const double l1 = pose_loss(off, base).value;
    const double euclid = mpjpe(off, base);

    o.detail << "max PA on similarity pairs " << worst_pa << " mm, PA > MPJPE in " << pa_above
             << "/1000, PCK exact " << (pck_exact ? "yes" : "no") << ", L1 example " << l1 << " mm, MPJPE example "
             << euclid << " mm";
    o.require(worst_pa < 1e-6, "PA on similarity pairs");
    o.require(pa_above == 0, "PA <= MPJPE");
    o.require(pck_exact, "PCK brute force");
    o.require(l1 == 0.5, "L1 example 0.5");
    o.require(std::abs(euclid - 5.0 / 14.0) < 1e-12, "Euclidean example 5/14");
}

double check_grad(const std::function<double(const Eigen::VectorXd &)> &f, const Eigen::VectorXd &x,
                  const Eigen::VectorXd &analytic) {
    return rel_error(analytic, fd_gradient(f, x, 1e-5));
}

void gradient_suite(Outcome &o) {
    const auto t0 = Clock::now();
    Rng rng(303);
    double worst = 0.0;
    auto note = [&](const std::string &name, double err) {
        worst = std::max(worst, err);
        if (err >= 1e-4) o.require(false, name);
    };

    // L1 pose loss, with every component at least 1 mm from its kink.
    for (int t = 0; t < 20; ++t) {
        PoseVector target = root_relative(random_pose(rng)).flat();
        PoseVector pred = target;
        for (int i = 0; i < kPoseSize; ++i) pred[i] += (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(1.0, 50.0);
        const PoseLoss l = pose_loss(pred, target);
        note("pose L1", check_grad([&](const Eigen::VectorXd &x) { return pose_loss(PoseVector(x), target).value; },
                                   pred, l.grad));
    }

    std::vector<Quaternion> cloud;
    for (int i = 0; i < 3000; ++i) cloud.push_back(random_unit(rng));
    for (int k : {1, 2, 100}) {
        const ClusterModel m = fit_kmeans(cloud, k, 1);
        for (int t = 0; t < 10; ++t) {
            const QuaternionHead raw = Eigen::Vector4d(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            const int c = static_cast<int>(rng.below(static_cast<uint64_t>(k)));
            for (double sign : {1.0, -1.0}) {
                const ViewLoss l = viewpoint_class_loss(raw, c, m, sign);
                note("class k=" + std::to_string(k),
                     check_grad([&](const Eigen::VectorXd &x) { return viewpoint_class_loss(x, c, m, sign).value; },
                                raw, l.grad));
            }
        }
    }

    for (int t = 0; t < 20; ++t) {
        const QuaternionHead raw = Eigen::Vector4d(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        const Quaternion target = canonicalize_quaternion(random_unit(rng));
        const ViewLoss l = viewpoint_reg_loss(raw, target);
        note("regression",
             check_grad([&](const Eigen::VectorXd &x) { return viewpoint_reg_loss(x, target).value; }, raw, l.grad));
    }

    // Combined loss at lambda 0.5 in every mode, over the joint pose and head input.
    const ClusterModel m100 = fit_kmeans(cloud, 100, 2);
    for (ViewLossMode mode : {ViewLossMode::kClassification, ViewLossMode::kRegression, ViewLossMode::kBoth}) {
        LossWeights w;
        w.lambda_q = 0.5;
        w.mode = mode;
        for (int t = 0; t < 5; ++t) {
            const PoseVector target = root_relative(random_pose(rng)).flat();
            PoseVector pred = target;
            for (int i = 0; i < kPoseSize; ++i) pred[i] += (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(1.0, 50.0);
            const QuaternionHead raw = Eigen::Vector4d(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            const Quaternion q_star = canonicalize_quaternion(random_unit(rng));
            const int c_star = assign(m100, q_star);
            const CombinedLoss l = combined_loss(pred, target, raw, c_star, q_star, w, &m100);
            Eigen::VectorXd x(kPoseSize + 4), g(kPoseSize + 4);
            x << pred, raw;
            g << l.grad_pose, l.grad_head;
            note("combined " + to_string(mode), check_grad(
                                                    [&](const Eigen::VectorXd &v) {
                                                        return combined_loss(PoseVector(v.head(kPoseSize)), target,
                                                                             v.tail(4), c_star, q_star, w, &m100)
                                                            .total;
                                                    },
                                                    x, g));
        }
    }

    // Full network: every parameter of a small net in each mode with the
    // canonical head, then a random subset of the default architecture.
    auto samples = prepare_samples(synth("3dpw-like", 300, 9), nullptr).samples;
    std::vector<Quaternion> qs;
    for (const auto &s : samples) qs.push_back(s.q_star);
    const ClusterModel model = fit_kmeans(qs, 20, 3);
    for (auto &s : samples) s.c_star = assign(model, s.q_star);
    const std::vector<size_t> batch = {0, 1, 2, 3, 4};
    auto net_error = [&](ToyNet net, const LossWeights &w, int max_params) {
        const Gradients g = backward(net, samples, batch, w, &model);
        Eigen::VectorXd &params = net.mlp().params();
        std::vector<Eigen::Index> idx;
        Rng pick(17);
        if (max_params < 0) {
            for (Eigen::Index i = 0; i < params.size(); ++i) idx.push_back(i);
        } else {
            for (int i = 0; i < max_params; ++i) idx.push_back(static_cast<Eigen::Index>(pick.below(params.size())));
        }
        Eigen::VectorXd a(idx.size()), n(idx.size());
        for (size_t k = 0; k < idx.size(); ++k) {
            const double orig = params[idx[k]];
            params[idx[k]] = orig + 1e-5;
            const double fp = backward(net, samples, batch, w, &model).loss.total;
            params[idx[k]] = orig - 1e-5;
            const double fm = backward(net, samples, batch, w, &model).loss.total;
            params[idx[k]] = orig;
            a[k] = g.params[idx[k]];
            n[k] = (fp - fm) / 2e-5;
        }
        return rel_error(a, n);
    };
    for (ViewLossMode mode : {ViewLossMode::kClassification, ViewLossMode::kRegression, ViewLossMode::kBoth}) {
        LossWeights w;
        w.mode = mode;
        note("ToyNet " + to_string(mode), net_error(ToyNet(ToyNetConfig{{12, 10}, true, 7}), w, -1));
    }
    note("ToyNet default", net_error(ToyNet(ToyNetConfig{{256, 256}, false, 1}), LossWeights{}, 300));

    const double s = seconds_since(t0);
    o.detail << "worst relative error " << worst << ", " << s << " s";
    o.require(s < 60.0, "runtime");
}

void clustering_suite(Outcome &o) {
    Rng rng(404);
    bool monotone = true;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Quaternion> pts;
        for (int i = 0; i < 3000; ++i) pts.push_back(random_unit(rng));
        KMeansTrace trace;
        fit_kmeans(pts, 30, static_cast<uint64_t>(trial), &trace);
        for (size_t i = 1; i < trace.inertia.size(); ++i) monotone = monotone && trace.inertia[i] <= trace.inertia[i - 1];
    }

    std::vector<Quaternion> cover;
    for (int i = 0; i < 16; ++i) cover.push_back(random_unit(rng));
    const double cover_inertia = fit_kmeans(cover, 16, 1).inertia;

    std::vector<Quaternion> cloud;
    for (int i = 0; i < 2000; ++i) cloud.push_back(random_unit(rng));
    const ClusterModel m = fit_kmeans(cloud, 40, 2);
    size_t antipodal_mismatch = 0;
    for (int i = 0; i < 5000; ++i) {
        const Quaternion q = random_unit(rng);
        antipodal_mismatch += assign(m, q) != assign(m, -q);
    }

    const double h = std::sqrt(0.5);
    const std::vector<Quaternion> gens = {Quaternion(1, 0, 0, 0), Quaternion(0.5, 0.5, 0.5, 0.5),
                                          Quaternion(h, h, 0, 0), Quaternion(h, 0, 0, -h)};
    std::vector<Quaternion> blobs;
    for (int i = 0; i < 2000; ++i) {
        Quaternion q = (gens[i % 4] + 0.02 * Quaternion(rng.normal(), rng.normal(), rng.normal(), rng.normal()))
                           .normalized();
        blobs.push_back(rng.uniform() < 0.5 ? Quaternion(-q) : q);
    }
    const ClusterModel g = fit_kmeans(blobs, 4, 3);
    double worst_gen = 0.0;
    for (const auto &gen : gens) {
        double best = 1e9;
        for (const auto &c : g.centers) best = std::min(best, (c - gen).norm());
        worst_gen = std::max(worst_gen, best);
    }

    std::vector<Quaternion> big;
    for (int i = 0; i < 50000; ++i) big.push_back(random_unit(rng));
    const auto t0 = Clock::now();
    fit_kmeans(big, 100, 0);
    const double s = seconds_since(t0);

    o.detail << "monotone " << (monotone ? "yes" : "no") << ", exact-cover inertia " << cover_inertia
             << ", antipodal mismatches " << antipodal_mismatch << ", generator distance " << worst_gen
             << ", k=100 on 50,000 in " << s << " s";
    o.require(monotone, "inertia monotone");
    o.require(cover_inertia < 1e-20, "exact cover");
    o.require(antipodal_mismatch == 0, "antipodal assignment");
    o.require(worst_gen < 0.05, "generator recovery");
    o.require(s < 60.0, "runtime");
}

void depth_codec(Outcome &o) {
    const DepthCodec c;
    const double lo = c.encode(-2400.0).coordinate, hi = c.encode(2400.0).coordinate;
    double worst_id = 0.0, worst_bin = 0.0;
    Rng rng(505);
    for (int i = 0; i <= 48000; ++i) {
        const double z = -2400.0 + 0.1 * i;
        worst_id = std::max(worst_id, std::abs(c.decode(c.encode(z).coordinate) - z));
        worst_bin = std::max(worst_bin, std::abs(c.decode_bin(c.encode_bin(z)) - z));
    }
    for (int i = 0; i < 100000; ++i) {
        const double z = rng.uniform(-2400.0, 2400.0);
        worst_id = std::max(worst_id, std::abs(c.decode(c.encode(z).coordinate) - z));
        worst_bin = std::max(worst_bin, std::abs(c.decode_bin(c.encode_bin(z)) - z));
    }
    const double bound = 2.0 * 2400.0 / 64.0 / 2.0;
    o.detail << "endpoints " << lo << ", " << hi << ", identity error " << worst_id << ", binned error " << worst_bin
             << " mm (bound " << bound << ")";
    o.require(lo == 0.0 && hi == 63.0, "endpoints");
    o.require(worst_id < 1e-9, "identity");
    o.require(worst_bin <= bound, "binned round trip");
}

void central_effect(Outcome &o) {
    const auto t0 = Clock::now();
    auto train_set = prepare_samples(synth("3dpw-like", 20000, 6001), nullptr).samples;
    auto cross = prepare_samples(synth("surreal-like", 5000, 6002), nullptr).samples;
    auto same = prepare_samples(synth("3dpw-like", 5000, 6003), nullptr).samples;

    // Global clusters over every dataset in the experiment.
    std::vector<Quaternion> qs;
    for (const auto *set : {&train_set, &cross, &same})
        for (const auto &s : *set) qs.push_back(s.q_star);
    const ClusterModel model = fit_kmeans(qs, 100, 0);
    for (auto &s : train_set) s.c_star = assign(model, s.q_star);

    int wins = 0;
    double rel_sum = 0.0, cross_sum = 0.0, same_sum = 0.0;
    o.detail << "per seed (baseline -> treated, cross | same):";
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const ToyNet init(ToyNetConfig{{256, 256}, false, seed});
        TrainConfig base;
        base.seed = seed;
        base.weights.lambda_q = 0.0;
        TrainConfig treated = base;
        treated.weights.lambda_q = 0.5;
        treated.weights.mode = ViewLossMode::kClassification;
        const ToyNet b = train(init, train_set, base, &model).net;
        const ToyNet t = train(init, train_set, treated, &model).net;
        const double bc = evaluate(b, cross).mpjpe_mm, tc = evaluate(t, cross).mpjpe_mm;
        const double bs = evaluate(b, same).mpjpe_mm, ts = evaluate(t, same).mpjpe_mm;
        wins += tc < bc;
        rel_sum += (bc - tc) / bc;
        cross_sum += bc - tc;
        same_sum += bs - ts;
        char buf[160];
        std::snprintf(buf, sizeof(buf), " %.2f->%.2f | %.2f->%.2f;", bc, tc, bs, ts);
        o.detail << buf;
    }
    const double mean_rel = rel_sum / 5.0, cross_red = cross_sum / 5.0, same_diff = same_sum / 5.0;
    const double s = seconds_since(t0);
    o.detail << " wins " << wins << "/5, mean relative reduction " << 100.0 * mean_rel << "%, cross reduction "
             << cross_red << " mm, same-profile difference " << same_diff << " mm, " << s << " s";
    o.require(wins >= 4, "at least 4 of 5 seed pairs improve");
    o.require(mean_rel >= 0.03, "mean relative reduction >= 3%");
    o.require(std::abs(same_diff) < cross_red, "same-profile difference below cross reduction");
    o.require(s < 600.0, "runtime");
}

void origin_probe(Outcome &o) {
    const size_t n = 2000;
    std::map<std::string, std::vector<PoseRecord>> shared, disjoint;
    uint64_t seed = 7000;
    const auto names = builtin_profile_names();
    for (size_t i = 0; i < names.size(); ++i) {
        shared[names[i]] = synth(names[i], n, ++seed);
        // Disjoint control: each profile bends the knees and hips in its own band.
        PosePoolParams pool;
        pool.knee_lo = 25.0 * i;
        pool.knee_hi = 25.0 * i + 20.0;
        pool.hip_flexion_lo = -20.0 + 22.0 * i;
        pool.hip_flexion_hi = -20.0 + 22.0 * i + 18.0;
        disjoint[names[i]] = synth(names[i], n, ++seed, pool);
    }
    const ProbeConfig pc;
    const double normalized = dataset_origin_probe(shared, ProbeFeatures::kBodyCenteredScaled, pc).accuracy;
    const double raw = dataset_origin_probe(shared, ProbeFeatures::kRootRelative, pc).accuracy;
    const double control = dataset_origin_probe(disjoint, ProbeFeatures::kBodyCenteredScaled, pc).accuracy;
    o.detail << "normalized " << normalized << ", unnormalized " << raw << ", disjoint-pool control " << control;
    o.require(normalized >= 0.15 && normalized <= 0.30, "normalized accuracy in [0.15, 0.30]");
    o.require(control > 0.9, "disjoint control > 0.9");
    o.require(raw > normalized, "unnormalized > normalized");
}

std::vector<std::vector<std::string>> read_csv(const std::string &file) {
    std::ifstream in(file);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

bool is_number(const std::string &s) {
    char *end = nullptr;
    std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size();
}

void write_records(const std::string &file, const std::vector<PoseRecord> &records) {
    std::ofstream out(file);
    write_jsonl(out, records);
}

void ablation(Outcome &o, const fs::path &dir) {
    const auto t0 = Clock::now();
    const std::string train = (dir / "train.jsonl").string(), test = (dir / "test.jsonl").string();
    write_records(train, synth("3dpw-like", 5000, 8001));
    write_records(test, synth("surreal-like", 2000, 8002));

    cli::AblateOptions a;
    a.train_file = train;
    a.tests = {test};
    a.experiments = {"k-sweep", "restarts"};
    a.out = (dir / "ablate.csv").string();
    cli::cmd_ablate(a);

    const auto rows = read_csv(a.out);
    const size_t width = 14;
    bool well_formed = !rows.empty() && rows[0].size() == width;
    std::vector<int> ks;
    std::vector<double> restarts;
    double spread = -1.0;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto &r = rows[i];
        well_formed = well_formed && r.size() == width;
        if (r.size() != width) continue;
        for (size_t c : {10, 11, 12, 13}) well_formed = well_formed && is_number(r[c]);
        if (r[0] == "k-sweep") ks.push_back(std::stoi(r[4]));
        if (r[0] == "restarts" && r[1] == "spread") spread = std::stod(r[11]);
        else if (r[0] == "restarts" && r[1] != "mean") restarts.push_back(std::stod(r[11]));
    }
    double mean = 0.0;
    for (double v : restarts) mean += v / restarts.size();
    const double lo = restarts.empty() ? 0 : *std::min_element(restarts.begin(), restarts.end());
    const double hi = restarts.empty() ? 0 : *std::max_element(restarts.begin(), restarts.end());
    const double rel = mean > 0 ? (hi - lo) / mean : 1.0;
    o.detail << rows.size() - 1 << " rows, k values";
    for (int k : ks) o.detail << " " << k;
    o.detail << ", restart MPJPE mean " << mean << " mm, spread " << hi - lo << " mm (" << 100.0 * rel << "%), "
             << seconds_since(t0) << " s";
    o.require(well_formed, "well-formed CSV");
    o.require(ks == std::vector<int>({10, 24, 50, 100, 200, 500}), "k-sweep rows");
    o.require(restarts.size() == 4, "four restarts");
    o.require(std::abs(spread - (hi - lo)) < 1e-5, "spread row");
    o.require(rel < 0.05, "restart spread < 5%");
}

int run(const std::string &args) {
    const std::string cmd = std::string(VIEWBIAS_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every regular file below `dir` except manifests, with its digest.
std::map<std::string, std::string> digests(const fs::path &dir) {
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.find("manifest.json") == std::string::npos) {
            out[fs::relative(e.path(), dir).string()] = sha256_file(e.path().string());
        }
    }
    return out;
}

void determinism(Outcome &o, const fs::path &root) {
    auto once = [&](const std::string &tag) {
        const fs::path d = root / tag;
        fs::create_directories(d);
        const std::string p = d.string() + "/";
        int failures = 0;
        failures += run("synth --profile 3dpw-like --count 1500 --seed 4 --out " + p + "train.jsonl") != 0;
        failures += run("synth --profile surreal-like --count 500 --seed 5 --out " + p + "test.jsonl") != 0;
        failures += run("analyze " + p + "train.jsonl " + p + "test.jsonl --features all --out-dir " + p + "an") != 0;
        failures += run("cluster " + p + "train.jsonl " + p + "test.jsonl --k 24 --seed 1 --out " + p + "c.json") != 0;
        failures += run("train --train " + p + "train.jsonl --clusters " + p + "c.json --epochs 3 --hidden 64,64 "
                        "--canonical-head --seed 2 --out " + p + "m.json") != 0;
        failures += run("eval --checkpoint " + p + "m.json " + p + "test.jsonl " + p + "train.jsonl --out " + p +
                        "r.csv --by-view " + p + "v") != 0;
        failures += run("ablate --train " + p + "train.jsonl " + p + "test.jsonl --ks 10,24 --k 24 --restarts 2 "
                        "--epochs 2 --hidden 32,32 --out " + p + "a.csv") != 0;
        return std::make_pair(failures, digests(d));
    };
    const auto [fa, a] = once("a");
    const auto [fb, b] = once("b");
    o.detail << a.size() << " output files over 7 invocations, commands failed " << fa + fb;
    size_t differing = 0;
    for (const auto &[file, hash] : a) {
        const auto it = b.find(file);
        if (it == b.end() || it->second != hash) {
            ++differing;
            o.detail << ", differs: " << file;
        }
    }
    o.detail << ", differing files " << differing;
    o.require(fa == 0 && fb == 0, "every command succeeds");
    o.require(a.size() == b.size() && a.size() >= 20, "same output set");
    o.require(differing == 0, "byte-identical outputs");
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "viewbias_acceptance";
    fs::remove_all(work);
    fs::create_directories(work / "ablation");

    const std::vector<std::pair<std::string, std::function<void(Outcome &)>>> criteria = {
        {"geometry", geometry},
        {"metric oracles", metric_oracles},
        {"gradient suite", gradient_suite},
        {"clustering suite", clustering_suite},
        {"depth codec", depth_codec},
        {"central effect", central_effect},
        {"dataset-origin probe", origin_probe},
        {"ablation harness", [&](Outcome &o) { ablation(o, work / "ablation"); }},
        {"determinism", [&](Outcome &o) { determinism(o, work / "determinism"); }},
    };

    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL")
                  << " | " << o.detail.str() << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}

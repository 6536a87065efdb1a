#include "viewbias/toy_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "viewbias/error.hpp"
#include "viewbias/rng.hpp"

namespace viewbias {

namespace {

constexpr Eigen::Index kViewRow = kPoseSize;
constexpr Eigen::Index kCanonicalRow = kPoseSize + 4;
constexpr size_t kPredictChunk = 1024;

std::vector<int> net_layer_sizes(const ToyNetConfig &config) {
    std::vector<int> sizes = {kInputSize};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(kPoseSize + 4 + (config.canonical_head ? kPoseSize : 0));
    return sizes;
}

void shuffle(std::vector<size_t> &order, Rng &rng) {
    for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
}

Eigen::MatrixXd gather_inputs(const std::vector<Sample> &samples, const std::vector<size_t> &batch) {
    Eigen::MatrixXd inputs(kInputSize, static_cast<Eigen::Index>(batch.size()));
    for (size_t b = 0; b < batch.size(); ++b) {
        inputs.col(static_cast<Eigen::Index>(b)) = samples[batch[b]].input;
    }
    return inputs;
}

} // namespace

InputVector normalize_keypoints(const Keypoints2d &keypoints, const CameraIntrinsics &camera) {
    std::array<Eigen::Vector2d, kNumJoints> rays;
    for (int j = 0; j < kNumJoints; ++j) {
        rays[j] = {(keypoints[j].x() - camera.cx) / camera.fx, (keypoints[j].y() - camera.cy) / camera.fy};
    }
    const Eigen::Vector2d root = rays[kPelvis];
    double extent = 0.0;
    for (auto &ray : rays) {
        ray -= root;
        extent = std::max(extent, ray.cwiseAbs().maxCoeff());
    }
    InputVector out;
    for (int j = 0; j < kNumJoints; ++j) {
        out.segment<2>(2 * j) = extent > 0.0 ? Eigen::Vector2d(rays[j] / extent) : Eigen::Vector2d::Zero();
    }
    return out;
}

PreparedSamples prepare_samples(const std::vector<PoseRecord> &records, const ClusterModel *clusters) {
    PreparedSamples out;
    out.samples.reserve(records.size());
    for (const auto &record : records) {
        BodyFrame frame;
        try {
            frame = compute_body_frame(record.pose3d);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::kDegenerateFrame) {
                throw;
            }
            ++out.skipped;
            continue;
        }
        const Keypoints2d kp = record.pose2d ? *record.pose2d : project_to_2d(record.pose3d, record.intrinsics);
        Sample s;
        s.input = normalize_keypoints(kp, record.intrinsics);
        s.target = root_relative(record.pose3d).flat();
        s.canonical = to_body_coordinates(record.pose3d, frame).flat();
        s.q_star = frame.q;
        s.c_star = clusters != nullptr ? assign(*clusters, frame.q) : -1;
        s.view = viewpoint_from_frame(frame, record.pose3d[kPelvis]);
        s.dataset = record.dataset;
        out.samples.push_back(std::move(s));
    }
    return out;
}

ToyNet::ToyNet(const ToyNetConfig &config)
    : mlp_(net_layer_sizes(config)), hidden_(config.hidden), canonical_head_(config.canonical_head) {
    mlp_.init(config.seed);
}

PoseVector ToyNet::encode_pose(const PoseVector &mm) const {
    PoseVector out;
    for (int i = 0; i < kPoseSize; ++i) {
        out[i] = codec_.encode(mm[i]).coordinate;
    }
    return out;
}

ToyNet::Output ToyNet::forward(const Eigen::MatrixXd &inputs, Mlp::Cache *cache) const {
    const Eigen::MatrixXd y = mlp_.forward(inputs, cache);
    const double scale = coord_per_unit();
    // decode(coord) with coord = scale * (1 + y) is simply z_max * y.
    Output out;
    out.pose_coord = (scale * (1.0 + y.topRows(kPoseSize).array())).matrix();
    out.pose = codec_.z_max * y.topRows(kPoseSize);
    out.raw_view = y.middleRows(kViewRow, 4);
    out.q.resize(4, y.cols());
    for (Eigen::Index b = 0; b < y.cols(); ++b) {
        out.q.col(b) = normalize_head(out.raw_view.col(b)).q;
    }
    if (canonical_head_) {
        out.canonical_coord = (scale * (1.0 + y.middleRows(kCanonicalRow, kPoseSize).array())).matrix();
        out.canonical = codec_.z_max * y.middleRows(kCanonicalRow, kPoseSize);
    }
    return out;
}

Gradients backward(const ToyNet &net, const std::vector<Sample> &samples, const std::vector<size_t> &batch,
                   const LossWeights &weights, const ClusterModel *clusters) {
    LossWeights effective = weights;
    if (effective.lambda_q == 0.0 && clusters == nullptr) {
        // Nothing flows through the viewpoint head; report L_q by regression.
        effective.mode = ViewLossMode::kRegression;
    }
    Mlp::Cache cache;
    const ToyNet::Output out = net.forward(gather_inputs(samples, batch), &cache);

    Eigen::MatrixXd grad_y = Eigen::MatrixXd::Zero(net.mlp().output_size(), out.pose.cols());
    Gradients result;
    for (size_t b = 0; b < batch.size(); ++b) {
        const Sample &s = samples[batch[b]];
        const auto col = static_cast<Eigen::Index>(b);
        const CombinedLoss loss = combined_loss(out.pose_coord.col(col), net.encode_pose(s.target),
                                                out.raw_view.col(col), s.c_star, s.q_star, effective, clusters);
        result.loss.total += loss.total;
        result.loss.pose += loss.pose;
        result.loss.view += loss.view;
        grad_y.col(col).head(kPoseSize) = net.coord_per_unit() * loss.grad_pose;
        grad_y.col(col).segment<4>(kViewRow) = loss.grad_head;
        if (net.has_canonical_head()) {
            const PoseLoss canonical =
                pose_loss(PoseVector(out.canonical_coord.col(col)), net.encode_pose(s.canonical));
            result.loss.canonical += canonical.value;
            result.loss.total += kCanonicalLossWeight * canonical.value;
            grad_y.col(col).segment<kPoseSize>(kCanonicalRow) =
                kCanonicalLossWeight * net.coord_per_unit() * canonical.grad;
        }
    }
    result.loss.count = batch.size();
    result.params = net.mlp().backward(cache, grad_y);
    return result;
}

void TrainConfig::validate() const {
    if (!(adam.learning_rate > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
    }
    if (batch_size < 1) {
        throw Error(ErrorCode::kInvalidArgument, "batch size must be at least 1");
    }
    if (epochs < 1) {
        throw Error(ErrorCode::kInvalidArgument, "epochs must be at least 1");
    }
    weights.validate();
}

nlohmann::json TrainConfig::to_json() const {
    return {{"learning_rate", adam.learning_rate},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"epsilon", adam.epsilon},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"decay_fraction", decay_fraction},
            {"lambda_q", weights.lambda_q},
            {"mode", to_string(weights.mode)},
            {"class_sign", weights.class_sign},
            {"seed", seed}};
}

TrainResult train(ToyNet net, const std::vector<Sample> &samples, const TrainConfig &config,
                  const ClusterModel *clusters) {
    config.validate();
    if (samples.empty()) {
        throw Error(ErrorCode::kEmptyInput, "no training samples");
    }
    Adam adam(net.mlp().num_params(), config.adam);
    const int decay_epoch = static_cast<int>(std::floor(config.decay_fraction * config.epochs));
    Rng rng(splitmix64(config.seed));

    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), size_t{0});

    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = config.adam.learning_rate * (epoch >= decay_epoch ? 0.1 : 1.0);
        shuffle(order, rng);
        EpochStats stats;
        stats.epoch = epoch + 1;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            const std::vector<size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                            order.begin() + static_cast<std::ptrdiff_t>(end));
            Gradients g = backward(net, samples, batch, config.weights, clusters);
            if (!std::isfinite(g.loss.total) || !g.params.allFinite()) {
                throw Error(ErrorCode::kDiverged, "non-finite loss at epoch " + std::to_string(epoch + 1) +
                                                      ", batch starting at " + std::to_string(start));
            }
            g.params /= static_cast<double>(batch.size());
            adam.step(net.mlp().params(), g.params, lr);
            stats.loss += g.loss.total;
            stats.pose += g.loss.pose;
            stats.view += g.loss.view;
        }
        const double n = static_cast<double>(samples.size());
        stats.loss /= n;
        stats.pose /= n;
        stats.view /= n;
        result.curve.push_back(stats);
    }
    result.net = std::move(net);
    return result;
}

std::vector<Prediction> predict(const ToyNet &net, const std::vector<Sample> &samples) {
    std::vector<Prediction> preds;
    preds.reserve(samples.size());
    for (size_t start = 0; start < samples.size(); start += kPredictChunk) {
        const size_t end = std::min(samples.size(), start + kPredictChunk);
        std::vector<size_t> batch(end - start);
        std::iota(batch.begin(), batch.end(), start);
        const ToyNet::Output out = net.forward(gather_inputs(samples, batch));
        for (size_t b = 0; b < batch.size(); ++b) {
            const auto col = static_cast<Eigen::Index>(b);
            Prediction p;
            p.pose = Pose::from_flat(out.pose.col(col));
            p.target = Pose::from_flat(samples[batch[b]].target);
            p.q = out.q.col(col);
            p.view = samples[batch[b]].view;
            preds.push_back(std::move(p));
        }
    }
    return preds;
}

EvalReport evaluate(const ToyNet &net, const std::vector<Sample> &samples, const EvalOptions &options) {
    const std::vector<Prediction> preds = predict(net, samples);
    std::vector<Pose> pred_poses;
    std::vector<Pose> gt_poses;
    pred_poses.reserve(preds.size());
    gt_poses.reserve(preds.size());
    for (const auto &p : preds) {
        pred_poses.push_back(p.pose);
        gt_poses.push_back(p.target);
    }
    return evaluate_poses(pred_poses, gt_poses, options);
}

nlohmann::json checkpoint_to_json(const ToyNet &net, const std::string &config_hash) {
    const Eigen::VectorXd &p = net.mlp().params();
    return {{"format", "viewbias-toynet-1"},
            {"layer_sizes", net.mlp().layer_sizes()},
            {"canonical_head", net.has_canonical_head()},
            {"z_max", net.codec().z_max},
            {"bins", net.codec().bins},
            {"config_hash", config_hash},
            {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

ToyNet checkpoint_from_json(const nlohmann::json &j) {
    try {
        const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
        ToyNetConfig config;
        config.canonical_head = j.at("canonical_head").get<bool>();
        if (sizes.size() < 3 || sizes.front() != kInputSize ||
            sizes.back() != kPoseSize + 4 + (config.canonical_head ? kPoseSize : 0)) {
            throw Error(ErrorCode::kShapeMismatch, "checkpoint layer sizes do not describe a ToyNet");
        }
        config.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
        ToyNet net(config);
        const auto params = j.at("params").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(params.size()) != net.mlp().num_params()) {
            throw Error(ErrorCode::kShapeMismatch, "checkpoint parameter count does not match its layer sizes");
        }
        net.mlp().params() = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
        return net;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, e.what());
    }
}

void write_checkpoint(const std::string &path, const ToyNet &net, const std::string &config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
    }
    out << checkpoint_to_json(net, config_hash).dump() << '\n';
}

ToyNet read_checkpoint(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path);
    }
    try {
        return checkpoint_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, path + ": " + e.what());
    }
}

Eigen::VectorXd probe_features(const PoseRecord &record, ProbeFeatures features) {
    Pose pose;
    if (features == ProbeFeatures::kRootRelative) {
        pose = root_relative(record.pose3d);
    } else {
        const BodyFrame frame = compute_body_frame(record.pose3d);
        pose = normalize_skeleton(to_body_coordinates(record.pose3d, frame), kDefaultBoneLengthSum);
    }
    return pose.flat() / 1000.0;
}

ProbeResult dataset_origin_probe(const std::map<std::string, std::vector<PoseRecord>> &records_by_dataset,
                                 ProbeFeatures features, const ProbeConfig &config) {
    if (records_by_dataset.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "the probe needs at least two datasets");
    }
    std::vector<Eigen::VectorXd> train_x, test_x;
    std::vector<int> train_y, test_y;
    int label = 0;
    for (const auto &[name, records] : records_by_dataset) {
        std::vector<Eigen::VectorXd> feats;
        for (const auto &r : records) {
            try {
                feats.push_back(probe_features(r, features));
            } catch (const Error &e) {
                if (e.code() != ErrorCode::kDegenerateFrame) {
                    throw;
                }
            }
        }
        std::vector<size_t> order(feats.size());
        std::iota(order.begin(), order.end(), size_t{0});
        Rng rng = Rng::for_index(config.seed, static_cast<uint64_t>(label));
        shuffle(order, rng);
        const auto n_test = static_cast<size_t>(std::round(config.test_fraction * static_cast<double>(feats.size())));
        for (size_t i = 0; i < order.size(); ++i) {
            if (i < n_test) {
                test_x.push_back(feats[order[i]]);
                test_y.push_back(label);
            } else {
                train_x.push_back(feats[order[i]]);
                train_y.push_back(label);
            }
        }
        ++label;
    }
    if (train_x.empty() || test_x.empty()) {
        throw Error(ErrorCode::kEmptyInput, "probe split left an empty train or test set");
    }
    const int classes = label;
    std::vector<int> sizes = {kPoseSize};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(classes);
    Mlp mlp(sizes);
    mlp.init(splitmix64(config.seed));
    Adam adam(mlp.num_params(), AdamOptions{config.learning_rate});
    Rng rng(splitmix64(config.seed + 1));

    std::vector<size_t> order(train_x.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            const auto count = static_cast<Eigen::Index>(end - start);
            Eigen::MatrixXd x(kPoseSize, count);
            for (Eigen::Index b = 0; b < count; ++b) {
                x.col(b) = train_x[order[start + static_cast<size_t>(b)]];
            }
            Mlp::Cache cache;
            const Eigen::MatrixXd logits = mlp.forward(x, &cache);
            Eigen::MatrixXd grad(classes, count);
            for (Eigen::Index b = 0; b < count; ++b) {
                const Eigen::VectorXd shifted = logits.col(b).array() - logits.col(b).maxCoeff();
                const Eigen::VectorXd p = shifted.array().exp() / shifted.array().exp().sum();
                grad.col(b) = p;
                grad(train_y[order[start + static_cast<size_t>(b)]], b) -= 1.0;
            }
            Eigen::VectorXd g = mlp.backward(cache, grad);
            g /= static_cast<double>(count);
            adam.step(mlp.params(), g, config.learning_rate);
        }
    }

    Eigen::MatrixXd x(kPoseSize, static_cast<Eigen::Index>(test_x.size()));
    for (size_t i = 0; i < test_x.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = test_x[i];
    }
    const Eigen::MatrixXd logits = mlp.forward(x);
    size_t correct = 0;
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        Eigen::Index best;
        logits.col(b).maxCoeff(&best);
        correct += best == test_y[static_cast<size_t>(b)] ? 1 : 0;
    }
    ProbeResult result;
    result.accuracy = static_cast<double>(correct) / static_cast<double>(test_x.size());
    result.train_count = train_x.size();
    result.test_count = test_x.size();
    return result;
}

} // namespace viewbias

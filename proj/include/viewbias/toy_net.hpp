#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "viewbias/body_frame.hpp"
#include "viewbias/heads_losses.hpp"
#include "viewbias/metrics.hpp"
#include "viewbias/mlp.hpp"
#include "viewbias/skeleton.hpp"
#include "viewbias/view_cluster.hpp"

namespace viewbias {

inline constexpr int kInputSize = 2 * kNumJoints;
inline constexpr int kPoseSize = 3 * kNumJoints;

using InputVector = Eigen::Matrix<double, kInputSize, 1>;

/// One training/evaluation example derived from a PoseRecord.
struct Sample {
    InputVector input;          // normalized 2D keypoints
    PoseVector target;          // root-relative 3D pose, mm
    PoseVector canonical;       // pose in its own body frame, mm
    Quaternion q_star;          // viewpoint quaternion
    int c_star = -1;            // cluster of q_star, -1 without a model
    Viewpoint view;
    std::string dataset;
};

/// Keypoints are taken to normalized image coordinates with the intrinsics,
/// centered on the pelvis, and scaled by their largest absolute coordinate
/// so every value lies in [-1, 1].
InputVector normalize_keypoints(const Keypoints2d &keypoints, const CameraIntrinsics &camera);

struct PreparedSamples {
    std::vector<Sample> samples;
    size_t skipped = 0; // records whose body frame is degenerate
};

PreparedSamples prepare_samples(const std::vector<PoseRecord> &records, const ClusterModel *clusters);

struct ToyNetConfig {
    std::vector<int> hidden = {256, 256};
    bool canonical_head = false;
    uint64_t seed = 0;
};

/// Keypoint-to-pose regressor with a shared trunk and linear heads:
/// root-relative pose (42), raw viewpoint quaternion (4) and optionally a
/// body-frame "canonical" pose (42). The heads are stacked rows of the last
/// layer, so enabling the canonical head leaves the pose head unchanged.
///
/// Pose rows are read as grid coordinates of the depth codec,
/// coord = (bins - 1) / 2 * (1 + y), and the pose losses are taken in those
/// units; forward() reports millimeters.
class ToyNet {
  public:

    ToyNet() = default;
    explicit ToyNet(const ToyNetConfig &config);

    const Mlp &mlp() const { return mlp_; }
    Mlp &mlp() { return mlp_; }
    bool has_canonical_head() const { return canonical_head_; }
    const std::vector<int> &hidden() const { return hidden_; }
    const DepthCodec &codec() const { return codec_; }

    // Raw pose rows <-> codec grid coordinates.
    double coord_per_unit() const { return 0.5 * (codec_.bins - 1); }
    PoseVector encode_pose(const PoseVector &mm) const;

    struct Output {
        Eigen::MatrixXd pose;          // 42 x B, mm
        Eigen::MatrixXd pose_coord;    // 42 x B, codec grid coordinates
        Eigen::MatrixXd raw_view;      // 4 x B
        Eigen::MatrixXd q;             // 4 x B, unit and canonical
        Eigen::MatrixXd canonical;       // 42 x B mm, or empty
        Eigen::MatrixXd canonical_coord; // 42 x B, or empty
    };

    /// Deterministic forward pass; throws kShapeMismatch for a wrong input size.
    Output forward(const Eigen::MatrixXd &inputs, Mlp::Cache *cache = nullptr) const;

  private:
    Mlp mlp_;
    std::vector<int> hidden_;
    bool canonical_head_ = false;
    DepthCodec codec_;
};

/// Weight of the canonical-pose L1 term when that head is enabled.
inline constexpr double kCanonicalLossWeight = 1.0;

struct BatchLoss {
    double total = 0.0; // summed over the batch
    double pose = 0.0;
    double view = 0.0;
    double canonical = 0.0;
    size_t count = 0;
};

struct Gradients {
    Eigen::VectorXd params;
    BatchLoss loss;
};

/// Exact reverse-mode gradient of the summed combined loss over `batch`
/// (indices into `samples`). With lambda_q = 0 the viewpoint rows get zero
/// gradient.
Gradients backward(const ToyNet &net, const std::vector<Sample> &samples, const std::vector<size_t> &batch,
                   const LossWeights &weights, const ClusterModel *clusters);

struct TrainConfig {
    AdamOptions adam;
    size_t batch_size = 128;
    int epochs = 25;
    // Learning rate is multiplied by 0.1 from epoch floor(decay_fraction * epochs).
    double decay_fraction = 0.68;
    LossWeights weights;
    uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double pose = 0.0;
    double view = 0.0;
};

struct TrainResult {
    ToyNet net;
    std::vector<EpochStats> curve;
};

/// Mini-batch Adam. Shuffling uses config.seed, so a run is reproducible
/// bit-for-bit. Throws kDiverged if the loss becomes non-finite.
TrainResult train(ToyNet net, const std::vector<Sample> &samples, const TrainConfig &config,
                  const ClusterModel *clusters);

struct Prediction {
    Pose pose;
    Pose target;
    Quaternion q;
    Viewpoint view;
};

std::vector<Prediction> predict(const ToyNet &net, const std::vector<Sample> &samples);
EvalReport evaluate(const ToyNet &net, const std::vector<Sample> &samples, const EvalOptions &options = {});

nlohmann::json checkpoint_to_json(const ToyNet &net, const std::string &config_hash);
ToyNet checkpoint_from_json(const nlohmann::json &j);
void write_checkpoint(const std::string &path, const ToyNet &net, const std::string &config_hash);
ToyNet read_checkpoint(const std::string &path);

// ---------------------------------------------------------------------------
// Dataset-origin probe.

enum class ProbeFeatures {
    kRootRelative,        // camera-frame joints minus pelvis
    kBodyCenteredScaled,  // body frame + skeleton-size normalization
};

struct ProbeConfig {
    std::vector<int> hidden = {64, 64};
    int epochs = 30;
    size_t batch_size = 128;
    double learning_rate = 1e-3;
    double test_fraction = 0.2;
    uint64_t seed = 0;
};

struct ProbeResult {
    double accuracy = 0.0;
    size_t train_count = 0;
    size_t test_count = 0;
};

Eigen::VectorXd probe_features(const PoseRecord &record, ProbeFeatures features);

/// Trains a classifier to predict which dataset a pose came from and reports
/// held-out accuracy. Each dataset is split separately so class balance is
/// preserved. Needs at least two datasets.
ProbeResult dataset_origin_probe(const std::map<std::string, std::vector<PoseRecord>> &records_by_dataset,
                                 ProbeFeatures features, const ProbeConfig &config = {});

} // namespace viewbias

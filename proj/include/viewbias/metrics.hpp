#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "viewbias/skeleton.hpp"

namespace viewbias {

inline constexpr double kDefaultPckThreshold = 150.0;

// Mean Euclidean joint error in mm. Both poses are expected root-relative.
double mpjpe(const Pose &pred, const Pose &gt);

enum class AlignmentKind { kSimilarity, kRigid };

struct Alignment {
    Pose aligned;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    double scale = 1.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Least-squares similarity (or rigid) transform taking pred onto gt, with a
/// reflection guard on the SVD. Throws kDegenerateAlignment when the
/// predicted joints are collinear.
Alignment procrustes_align(const Pose &pred, const Pose &gt, AlignmentKind kind = AlignmentKind::kSimilarity);

double pa_mpjpe(const Pose &pred, const Pose &gt, AlignmentKind kind = AlignmentKind::kSimilarity);

enum class PckMode {
    kPerJoint, // fraction of (sample, joint) pairs under the threshold
    kPerPose,  // fraction of samples whose MPJPE is under the threshold
};

double pck3d(const std::vector<Pose> &preds, const std::vector<Pose> &gts, double threshold = kDefaultPckThreshold,
             PckMode mode = PckMode::kPerJoint);

struct EvalReport {
    double mpjpe_mm = 0.0;
    double pa_mpjpe_mm = 0.0;
    double pck3d = 0.0;
    size_t count = 0;
    std::array<double, kNumJoints> joint_mpjpe_mm{};
    std::array<double, kNumJoints> joint_pa_mpjpe_mm{};
    std::array<double, kNumJoints> joint_pck3d{};
};

struct EvalOptions {
    double pck_threshold = kDefaultPckThreshold;
    PckMode pck_mode = PckMode::kPerJoint;
    AlignmentKind alignment = AlignmentKind::kSimilarity;
};

EvalReport evaluate_poses(const std::vector<Pose> &preds, const std::vector<Pose> &gts,
                          const EvalOptions &options = {});

nlohmann::json eval_report_to_json(const EvalReport &report);

// Columns for one cell of a train-set x test-set grid.
std::string eval_csv_header();
std::string eval_csv_row(const std::string &train_set, const std::string &test_set, const EvalReport &report);

} // namespace viewbias

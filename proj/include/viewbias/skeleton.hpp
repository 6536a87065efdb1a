#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace viewbias {

inline constexpr int kNumJoints = 14;
inline constexpr int kNumBones = 13;

enum Joint : int {
    kPelvis = 0,
    kNeck,
    kHead,
    kLShoulder,
    kRShoulder,
    kLElbow,
    kRElbow,
    kLWrist,
    kRWrist,
    kLHip,
    kRHip,
    kLKnee,
    kRKnee,
    kLAnkle,
};

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "pelvis", "neck",    "head",    "l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
    "l_wrist", "r_wrist", "l_hip", "r_hip",      "l_knee",     "r_knee",  "l_ankle"};

// Parent -> child pairs; together they form a tree rooted at the pelvis.
inline constexpr std::array<std::pair<int, int>, kNumBones> kBones = {{
    {kPelvis, kNeck},
    {kNeck, kHead},
    {kNeck, kLShoulder},
    {kNeck, kRShoulder},
    {kLShoulder, kLElbow},
    {kRShoulder, kRElbow},
    {kLElbow, kLWrist},
    {kRElbow, kRWrist},
    {kPelvis, kLHip},
    {kPelvis, kRHip},
    {kLHip, kLKnee},
    {kRHip, kRKnee},
    {kLKnee, kLAnkle},
}};

// Default skeleton size for normalization, in millimeters.
inline constexpr double kDefaultBoneLengthSum = 3700.0;

using PoseVector = Eigen::Matrix<double, 3 * kNumJoints, 1>;

/// 14 joint positions in millimeters. In camera coordinates the axes are
/// x-right, y-down, z-forward.
struct Pose {
    std::array<Eigen::Vector3d, kNumJoints> joints;

    Pose() { joints.fill(Eigen::Vector3d::Zero()); }

    Eigen::Vector3d &operator[](int j) { return joints[j]; }
    const Eigen::Vector3d &operator[](int j) const { return joints[j]; }

    bool is_finite() const;
    // Joint-major flattening: x0 y0 z0 x1 ...
    PoseVector flat() const;
    static Pose from_flat(const Eigen::Ref<const Eigen::VectorXd> &values);
};

using Keypoints2d = std::array<Eigen::Vector2d, kNumJoints>;

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    // Throws unless both focal lengths are positive.
    void validate() const;
};

struct PoseRecord {
    std::string dataset;
    std::string subject;
    int64_t frame = 0;
    CameraIntrinsics intrinsics;
    Pose pose3d;
    std::optional<Keypoints2d> pose2d;
    bool pelvis_synthesized = false;
};

Pose root_relative(const Pose &pose);

double bone_length_sum(const Pose &pose);

/// Root-relative pose uniformly rescaled so that its bone-length sum equals
/// `target_sum`. Throws kDegenerateSkeleton for a zero-size skeleton.
Pose normalize_skeleton(const Pose &pose, double target_sum = kDefaultBoneLengthSum);

// Pinhole projection; throws kBehindCamera for any z <= 0.
Keypoints2d project_to_2d(const Pose &pose, const CameraIntrinsics &camera);

Pose back_project(const Keypoints2d &keypoints, const std::array<double, kNumJoints> &depths,
                  const CameraIntrinsics &camera);

// Midpoint of the hips, used when a source has no pelvis joint.
Eigen::Vector3d synthesized_pelvis(const Pose &pose);

Pose apply_rotation(const Eigen::Matrix3d &rotation, const Pose &pose);

} // namespace viewbias

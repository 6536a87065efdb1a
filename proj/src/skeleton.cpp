#include "viewbias/skeleton.hpp"

#include <cmath>
#include <string>

#include "viewbias/error.hpp"

namespace viewbias {

bool Pose::is_finite() const {
    for (const auto &joint : joints) {
        if (!joint.allFinite()) {
            return false;
        }
    }
    return true;
}

PoseVector Pose::flat() const {
    PoseVector out;
    for (int j = 0; j < kNumJoints; ++j) {
        out.segment<3>(3 * j) = joints[j];
    }
    return out;
}

Pose Pose::from_flat(const Eigen::Ref<const Eigen::VectorXd> &values) {
    if (values.size() != 3 * kNumJoints) {
        throw Error(ErrorCode::kShapeMismatch,
                    "expected " + std::to_string(3 * kNumJoints) + " values, got " + std::to_string(values.size()));
    }
    Pose pose;
    for (int j = 0; j < kNumJoints; ++j) {
        pose.joints[j] = values.segment<3>(3 * j);
    }
    return pose;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
    }
}

Pose root_relative(const Pose &pose) {
    Pose out;
    const Eigen::Vector3d root = pose[kPelvis];
    for (int j = 0; j < kNumJoints; ++j) {
        out[j] = pose[j] - root;
    }
    out[kPelvis].setZero();
    return out;
}

double bone_length_sum(const Pose &pose) {
    double sum = 0.0;
    for (const auto &[parent, child] : kBones) {
        sum += (pose[child] - pose[parent]).norm();
    }
    return sum;
}

Pose normalize_skeleton(const Pose &pose, double target_sum) {
    const double current = bone_length_sum(pose);
    if (!(current > 0.0) || !std::isfinite(current)) {
        throw Error(ErrorCode::kDegenerateSkeleton, "bone-length sum is " + std::to_string(current));
    }
    Pose out = root_relative(pose);
    const double scale = target_sum / current;
    for (auto &joint : out.joints) {
        joint *= scale;
    }
    return out;
}

Keypoints2d project_to_2d(const Pose &pose, const CameraIntrinsics &camera) {
    Keypoints2d out;
    for (int j = 0; j < kNumJoints; ++j) {
        const Eigen::Vector3d &p = pose[j];
        if (!(p.z() > 0.0)) {
            throw Error(ErrorCode::kBehindCamera, std::string(kJointNames[j]) + " has z <= 0");
        }
        out[j] = {camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy};
    }
    return out;
}

Pose back_project(const Keypoints2d &keypoints, const std::array<double, kNumJoints> &depths,
                  const CameraIntrinsics &camera) {
    Pose out;
    for (int j = 0; j < kNumJoints; ++j) {
        const double z = depths[j];
        if (!(z > 0.0)) {
            throw Error(ErrorCode::kBehindCamera, std::string(kJointNames[j]) + " has z <= 0");
        }
        out[j] = {(keypoints[j].x() - camera.cx) * z / camera.fx, (keypoints[j].y() - camera.cy) * z / camera.fy, z};
    }
    return out;
}

Eigen::Vector3d synthesized_pelvis(const Pose &pose) { return 0.5 * (pose[kLHip] + pose[kRHip]); }

Pose apply_rotation(const Eigen::Matrix3d &rotation, const Pose &pose) {
    Pose out;
    for (int j = 0; j < kNumJoints; ++j) {
        out[j] = rotation * pose[j];
    }
    return out;
}

} // namespace viewbias

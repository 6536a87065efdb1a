#include "viewbias/body_frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "viewbias/error.hpp"

namespace viewbias {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

} // namespace

Eigen::Matrix3d BodyFrame::rotation() const {
    Eigen::Matrix3d m;
    m.col(0) = -right;
    m.col(1) = -up;
    m.col(2) = -front;
    return m;
}

BodyFrame compute_body_frame(const Pose &pose) {
    const Eigen::Vector3d &pelvis = pose[kPelvis];
    const Eigen::Vector3d &left = pose[kLShoulder];
    const Eigen::Vector3d &right = pose[kRShoulder];

    const Eigen::Vector3d up_raw = 0.5 * (left + right) - pelvis;
    const Eigen::Vector3d front_raw = (left - pelvis).cross(right - pelvis);

    const double span_sq = (left - right).squaredNorm();
    const double area = 0.5 * front_raw.norm();
    if (!(span_sq > 0.0) || !(area >= 1e-6 * span_sq)) {
        throw Error(ErrorCode::kDegenerateFrame, "pelvis and shoulders are (nearly) collinear");
    }

    BodyFrame frame;
    frame.front = front_raw.normalized();
    Eigen::Vector3d up = up_raw - up_raw.dot(frame.front) * frame.front;
    const double up_norm = up.norm();
    if (!(up_norm > 1e-12 * std::max(1.0, up_raw.norm()))) {
        throw Error(ErrorCode::kDegenerateFrame, "up direction vanishes");
    }
    frame.up = up / up_norm;
    frame.right = frame.front.cross(frame.up);
    frame.q = rotation_to_quaternion(frame.rotation());
    return frame;
}

Quaternion rotation_to_quaternion(const Eigen::Matrix3d &m) {
    const double orth_err = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
    const double det = m.determinant();
    if (!m.allFinite() || !(orth_err < 1e-6) || !(std::abs(det - 1.0) < 1e-6)) {
        throw Error(ErrorCode::kNotOrthonormal,
                    "orthogonality error " + std::to_string(orth_err) + ", det " + std::to_string(det));
    }

    const double trace = m.trace();
    Quaternion q;
    if (trace >= m(0, 0) && trace >= m(1, 1) && trace >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + trace);
        q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
        q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
        q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s;
    } else {
        const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
        q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s;
    }
    return canonicalize_quaternion(q);
}

Eigen::Matrix3d quaternion_to_rotation(const Quaternion &q_in) {
    const double norm = q_in.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::kZeroQuaternion, "cannot convert to a rotation");
    }
    const Quaternion q = q_in / norm;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d m;
    m << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y), //
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),   //
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return m;
}

Quaternion canonicalize_quaternion(const Quaternion &q) {
    const double norm = q.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::kZeroQuaternion, "cannot canonicalize");
    }
    Quaternion out = q / norm;
    for (int i = 0; i < 4; ++i) {
        if (out[i] != 0.0) {
            if (out[i] < 0.0) {
                out = -out;
            }
            break;
        }
    }
    return out;
}

Viewpoint viewpoint_from_frame(const BodyFrame &frame, const Eigen::Vector3d &pelvis_cam) {
    const double dist = pelvis_cam.norm();
    if (!(dist > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "pelvis at the camera origin");
    }
    const Eigen::Vector3d to_camera = -pelvis_cam / dist;
    const double along_right = frame.right.dot(to_camera);
    const double along_up = frame.up.dot(to_camera);
    const double along_front = frame.front.dot(to_camera);

    Viewpoint view;
    if (std::abs(along_right) < 1e-12 && std::abs(along_front) < 1e-12) {
        view.azimuth_deg = 0.0;
    } else {
        view.azimuth_deg = std::atan2(along_right, along_front) * kRadToDeg;
        if (view.azimuth_deg <= -180.0) {
            view.azimuth_deg = 180.0;
        }
    }
    view.elevation_deg = std::asin(std::clamp(along_up, -1.0, 1.0)) * kRadToDeg;
    return view;
}

Quaternion single_branch_quaternion(const BodyFrame &frame) {
    const Eigen::Vector3d &r = frame.right;
    const Eigen::Vector3d &u = frame.up;
    const Eigen::Vector3d &f = frame.front;
    const double q0 = std::sqrt(1.0 - r[0] - u[1] - f[2]);
    Quaternion q;
    q << 0.5 * q0, (u[2] - f[1]) / (2.0 * q0), (f[0] - r[2]) / (2.0 * q0), (r[1] - u[0]) / (2.0 * q0);
    return q;
}

Pose to_body_coordinates(const Pose &pose, const BodyFrame &frame) {
    return apply_rotation(frame.rotation().transpose(), root_relative(pose));
}

Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d &axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

} // namespace viewbias

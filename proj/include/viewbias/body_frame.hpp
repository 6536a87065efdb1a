#pragma once

#include <Eigen/Core>

#include "viewbias/skeleton.hpp"

namespace viewbias {

/// Unit quaternion stored as (w, x, y, z).
using Quaternion = Eigen::Vector4d;

/// Body-centered frame anchored at the pelvis. The axes are unit vectors in
/// camera coordinates with r = f x u, so [r u f] is left-handed; the
/// body-to-camera rotation is the right-handed matrix -[r u f] (columns).
struct BodyFrame {
    Eigen::Vector3d right;
    Eigen::Vector3d up;
    Eigen::Vector3d front;
    Quaternion q;

    Eigen::Matrix3d rotation() const;
};

struct Viewpoint {
    double azimuth_deg = 0.0;   // (-180, 180], 0 = camera in front of the subject
    double elevation_deg = 0.0; // [-90, 90], positive = camera above
};

/// Frame spanned by the pelvis and both shoulders. Up points from the pelvis
/// to the shoulder midpoint, front is the torso-plane normal, and both are
/// re-orthogonalized before right is formed. Throws kDegenerateFrame when the
/// torso triangle has (near) zero area.
BodyFrame compute_body_frame(const Pose &pose);

/// Stable matrix-to-quaternion conversion (pivot on the largest of the trace
/// and the three diagonal entries). Result is canonical (w >= 0). Throws
/// kNotOrthonormal unless R is a rotation within 1e-6.
Quaternion rotation_to_quaternion(const Eigen::Matrix3d &rotation);

Eigen::Matrix3d quaternion_to_rotation(const Quaternion &q);

// q and -q encode the same rotation; pick w > 0, or for w == 0 the sign that
// makes the first nonzero component positive. Throws kZeroQuaternion.
Quaternion canonicalize_quaternion(const Quaternion &q);

Viewpoint viewpoint_from_frame(const BodyFrame &frame, const Eigen::Vector3d &pelvis_cam);

// Single-branch trace formula in terms of the frame axes, only valid away
// from 180 degree rotations. It yields the quaternion of rotation().transpose()
// and is kept as a cross-check of rotation_to_quaternion.
Quaternion single_branch_quaternion(const BodyFrame &frame);

// Root-relative pose rotated into its own body frame, i.e. by the inverse of
// BodyFrame::rotation(). The result frames to the identity quaternion.
Pose to_body_coordinates(const Pose &pose, const BodyFrame &frame);

// Rotation from an axis (need not be normalized) and an angle in radians.
Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d &axis, double angle);

} // namespace viewbias

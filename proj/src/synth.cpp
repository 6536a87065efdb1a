#include "viewbias/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "viewbias/error.hpp"

namespace viewbias {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Segment lengths (mm) of the reference skeleton; their bone-length sum over
// kBones is exactly kDefaultBoneLengthSum.
constexpr double kSpine = 500.0;
constexpr double kNeckHead = 200.0;
constexpr double kClavicle = 170.0;
constexpr double kUpperArm = 290.0;
constexpr double kForearm = 260.0;
constexpr double kHipOffset = 120.0;
constexpr double kThigh = 445.0;
constexpr double kShin = 430.0;
static_assert(kSpine + kNeckHead + 2 * kClavicle + 2 * kUpperArm + 2 * kForearm + 2 * kHipOffset + 2 * kThigh +
                  kShin ==
              kDefaultBoneLengthSum);

constexpr double kMinDistanceM = 1.5;
constexpr int kMaxPlacementAttempts = 200;

Eigen::Matrix3d rot(const Eigen::Vector3d &axis, double deg) {
    return Eigen::AngleAxisd(deg * kDegToRad, axis.normalized()).toRotationMatrix();
}

double truncated_normal(Rng &rng, double mean, double stddev, double lo, double hi) {
    if (stddev <= 0.0) {
        return std::clamp(mean, lo, hi);
    }
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal(mean, stddev);
        if (x >= lo && x <= hi) {
            return x;
        }
    }
    return std::clamp(mean, lo, hi);
}

} // namespace

double wrap_degrees(double deg) {
    double out = std::fmod(deg + 180.0, 360.0);
    if (out < 0.0) {
        out += 360.0;
    }
    out -= 180.0;
    return out <= -180.0 ? 180.0 : out;
}

void BiasProfile::validate() const {
    double total = 0.0;
    for (const auto &c : azimuth) {
        if (c.weight < 0.0 || c.spread_deg < 0.0) {
            throw Error(ErrorCode::kInvalidArgument, name + ": negative azimuth weight or spread");
        }
        total += c.weight;
    }
    if (azimuth.empty() || std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument, name + ": azimuth weights must sum to 1");
    }
    if (elevation_std_deg < 0.0 || distance_std_m < 0.0 || focal_std_px < 0.0 || bone_sum_std_mm < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, name + ": standard deviations must be non-negative");
    }
    if (!(distance_mean_m > 0.0) || !(focal_mean_px > 0.0) || !(bone_sum_mean_mm > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, name + ": distance, focal and bone length must be positive");
    }
    if (elevation_uniform && !(elevation_lo_deg <= elevation_hi_deg)) {
        throw Error(ErrorCode::kInvalidArgument, name + ": empty elevation range");
    }
    if (image_width < 1 || image_height < 1) {
        throw Error(ErrorCode::kInvalidArgument, name + ": image size must be positive");
    }
}

PosePoolParams PosePoolParams::raised_arms() {
    PosePoolParams p;
    p.arm_abduction_lo = 150;
    p.arm_abduction_hi = 175;
    p.arm_flexion_lo = -10;
    p.arm_flexion_hi = 10;
    p.elbow_lo = 0;
    p.elbow_hi = 20;
    return p;
}

std::vector<BiasProfile> builtin_profiles() {
    std::vector<BiasProfile> out;

    BiasProfile h36m;
    h36m.name = "h36m-like";
    h36m.azimuth = {{0.25, -30.0, 12.0, false}, {0.25, 30.0, 12.0, false}, {0.25, -160.0, 12.0, false},
                    {0.25, 160.0, 12.0, false}};
    h36m.elevation_mean_deg = 10.0;
    h36m.elevation_std_deg = 6.0;
    h36m.distance_mean_m = 5.2;
    h36m.distance_std_m = 0.8;
    h36m.focal_mean_px = 1146.8;
    h36m.focal_std_px = 2.0;
    h36m.bone_sum_mean_mm = 3900.0;
    h36m.bone_sum_std_mm = 100.0;
    h36m.image_width = 1000;
    h36m.image_height = 1002;
    out.push_back(h36m);

    BiasProfile gpa;
    gpa.name = "gpa-like";
    gpa.azimuth = {{0.85, 15.0, 75.0, true}, {0.15, 0.0, 180.0, true}};
    gpa.elevation_mean_deg = 5.0;
    gpa.elevation_std_deg = 10.0;
    gpa.distance_mean_m = 5.1;
    gpa.distance_std_m = 1.2;
    gpa.focal_mean_px = 1172.4;
    gpa.focal_std_px = 121.3;
    gpa.bone_sum_mean_mm = 3700.0;
    gpa.bone_sum_std_mm = 200.0;
    gpa.image_width = 1920;
    gpa.image_height = 1080;
    out.push_back(gpa);

    BiasProfile surreal;
    surreal.name = "surreal-like";
    surreal.azimuth = {{1.0, 0.0, 180.0, true}};
    surreal.elevation_uniform = true;
    surreal.elevation_lo_deg = -30.0;
    surreal.elevation_hi_deg = 30.0;
    surreal.elevation_std_deg = 0.0;
    surreal.distance_mean_m = 8.0;
    surreal.distance_std_m = 1.0;
    surreal.focal_mean_px = 600.0;
    surreal.focal_std_px = 0.0;
    surreal.bone_sum_mean_mm = 3700.0;
    surreal.bone_sum_std_mm = 200.0;
    surreal.image_width = 320;
    surreal.image_height = 240;
    out.push_back(surreal);

    BiasProfile pw3d;
    pw3d.name = "3dpw-like";
    pw3d.azimuth = {{0.95, 15.0, 22.0, false}, {0.05, 0.0, 180.0, true}};
    pw3d.elevation_mean_deg = 0.0;
    pw3d.elevation_std_deg = 8.0;
    pw3d.distance_mean_m = 3.5;
    pw3d.distance_std_m = 0.7;
    pw3d.focal_mean_px = 1962.2;
    pw3d.focal_std_px = 1.5;
    pw3d.bone_sum_mean_mm = 3700.0;
    pw3d.bone_sum_std_mm = 100.0;
    // Handheld footage; portrait orientation keeps close subjects in frame.
    pw3d.image_width = 1080;
    pw3d.image_height = 1920;
    out.push_back(pw3d);

    BiasProfile hp3d;
    hp3d.name = "3dhp-like";
    hp3d.azimuth = {{0.7, 0.0, 180.0, true}, {0.3, 0.0, 30.0, false}};
    hp3d.elevation_mean_deg = 15.0;
    hp3d.elevation_std_deg = 20.0;
    hp3d.distance_mean_m = 3.8;
    hp3d.distance_std_m = 0.8;
    hp3d.focal_mean_px = 1497.88;
    hp3d.focal_std_px = 2.8;
    hp3d.bone_sum_mean_mm = 3700.0;
    hp3d.bone_sum_std_mm = 100.0;
    hp3d.image_width = 2048;
    hp3d.image_height = 2048;
    out.push_back(hp3d);

    return out;
}

std::vector<std::string> builtin_profile_names() {
    std::vector<std::string> names;
    for (const auto &p : builtin_profiles()) {
        names.push_back(p.name);
    }
    return names;
}

BiasProfile builtin_profile(const std::string &name) {
    for (auto &p : builtin_profiles()) {
        if (p.name == name) {
            return p;
        }
    }
    std::string valid;
    for (const auto &n : builtin_profile_names()) {
        valid += (valid.empty() ? "" : ", ") + n;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown profile '" + name + "'; valid profiles: " + valid);
}

double sample_angle(const std::vector<AngleComponent> &mixture, Rng &rng) {
    const double pick = rng.uniform();
    double acc = 0.0;
    const AngleComponent *chosen = &mixture.back();
    for (const auto &c : mixture) {
        acc += c.weight;
        if (pick < acc) {
            chosen = &c;
            break;
        }
    }
    const double offset =
        chosen->uniform ? rng.uniform(-chosen->spread_deg, chosen->spread_deg) : rng.normal(0.0, chosen->spread_deg);
    return wrap_degrees(chosen->center_deg + offset);
}

Viewpoint sample_viewpoint(const BiasProfile &profile, Rng &rng) {
    Viewpoint v;
    v.azimuth_deg = sample_angle(profile.azimuth, rng);
    if (profile.elevation_uniform) {
        v.elevation_deg = rng.uniform(profile.elevation_lo_deg, profile.elevation_hi_deg);
    } else {
        // Stay clear of the poles, where azimuth is undefined.
        v.elevation_deg = truncated_normal(rng, profile.elevation_mean_deg, profile.elevation_std_deg, -89.0, 89.0);
    }
    return v;
}

Pose sample_body_pose(const PosePoolParams &pool, Rng &rng) {
    // Anatomical axes in the camera convention of a person facing the camera:
    // their left is +x, up is -y, front (towards the camera) is -z.
    const Eigen::Vector3d left(1, 0, 0);
    const Eigen::Vector3d up(0, -1, 0);
    const Eigen::Vector3d front(0, 0, -1);

    const Eigen::Matrix3d torso = rot(front, rng.uniform(pool.torso_side_lo, pool.torso_side_hi)) *
                                  rot(left, rng.uniform(pool.torso_lean_lo, pool.torso_lean_hi));
    const Eigen::Vector3d spine = torso * up;
    const Eigen::Matrix3d chest = rot(spine, rng.uniform(pool.torso_twist_lo, pool.torso_twist_hi)) * torso;
    const Eigen::Vector3d chest_left = chest * left;
    const Eigen::Vector3d chest_front = chest * front;

    Pose pose;
    pose[kPelvis] = Eigen::Vector3d::Zero();
    pose[kNeck] = kSpine * spine;
    pose[kHead] = pose[kNeck] + kNeckHead * (rot(chest_left, rng.uniform(pool.head_tilt_lo, pool.head_tilt_hi)) * spine);
    pose[kLShoulder] = pose[kNeck] + kClavicle * chest_left;
    pose[kRShoulder] = pose[kNeck] - kClavicle * chest_left;

    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? 1.0 : -1.0;
        const int shoulder = side == 0 ? kLShoulder : kRShoulder;
        const int elbow = side == 0 ? kLElbow : kRElbow;
        const int wrist = side == 0 ? kLWrist : kRWrist;
        // Abduction swings the arm outwards (about front), flexion forwards
        // (about left); both start from hanging down.
        const Eigen::Matrix3d shoulder_rot = rot(chest_left, -rng.uniform(pool.arm_flexion_lo, pool.arm_flexion_hi)) *
                                             rot(chest_front, s * rng.uniform(pool.arm_abduction_lo, pool.arm_abduction_hi));
        const Eigen::Vector3d upper = shoulder_rot * (-spine);
        Eigen::Vector3d hinge = upper.cross(chest_front);
        if (hinge.norm() < 1e-6) {
            hinge = chest_left;
        }
        const Eigen::Vector3d fore = rot(hinge, rng.uniform(pool.elbow_lo, pool.elbow_hi)) * upper;
        pose[elbow] = pose[shoulder] + kUpperArm * upper;
        pose[wrist] = pose[elbow] + kForearm * fore;
    }

    pose[kLHip] = kHipOffset * left;
    pose[kRHip] = -kHipOffset * left;
    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? 1.0 : -1.0;
        const int hip = side == 0 ? kLHip : kRHip;
        const int knee = side == 0 ? kLKnee : kRKnee;
        const Eigen::Matrix3d hip_rot = rot(left, -rng.uniform(pool.hip_flexion_lo, pool.hip_flexion_hi)) *
                                        rot(front, s * rng.uniform(pool.hip_abduction_lo, pool.hip_abduction_hi));
        const Eigen::Vector3d thigh = hip_rot * (-up);
        pose[knee] = pose[hip] + kThigh * thigh;
        const double knee_flex = rng.uniform(pool.knee_lo, pool.knee_hi);
        if (side == 0) {
            const Eigen::Vector3d shin = rot(left, knee_flex) * thigh;
            pose[kLAnkle] = pose[knee] + kShin * shin;
        }
    }
    return pose;
}

std::vector<SynthSample> generate_samples(const SynthConfig &config) {
    config.profile.validate();
    const BiasProfile &profile = config.profile;
    std::vector<SynthSample> out;
    out.reserve(config.count);

    for (size_t i = 0; i < config.count; ++i) {
        Rng rng = Rng::for_index(config.seed, i);
        SynthSample sample;
        for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
            const Pose body = sample_body_pose(config.pool, rng);
            const double bone_sum =
                truncated_normal(rng, profile.bone_sum_mean_mm, profile.bone_sum_std_mm,
                                 profile.bone_sum_mean_mm - 3.0 * profile.bone_sum_std_mm,
                                 profile.bone_sum_mean_mm + 3.0 * profile.bone_sum_std_mm);
            const Pose scaled = normalize_skeleton(body, bone_sum);
            const BodyFrame frame = compute_body_frame(scaled);

            const Viewpoint view = sample_viewpoint(profile, rng);
            const double distance_m =
                truncated_normal(rng, profile.distance_mean_m, profile.distance_std_m,
                                 std::max(kMinDistanceM, profile.distance_mean_m - 4.0 * profile.distance_std_m),
                                 profile.distance_mean_m + 4.0 * profile.distance_std_m);
            const double focal = truncated_normal(rng, profile.focal_mean_px, profile.focal_std_px,
                                                  0.5 * profile.focal_mean_px, 1.5 * profile.focal_mean_px);

            // Direction from pelvis to camera in the pose's own coordinates.
            const double az = view.azimuth_deg * kDegToRad;
            const double el = view.elevation_deg * kDegToRad;
            const Eigen::Vector3d to_camera = std::cos(el) * std::sin(az) * frame.right + std::sin(el) * frame.up +
                                              std::cos(el) * std::cos(az) * frame.front;
            const Eigen::Vector3d center = 1000.0 * distance_m * to_camera;

            // Camera looks at the pelvis with image-down along the body's down.
            const Eigen::Vector3d z_axis = -to_camera;
            Eigen::Vector3d y_axis = -frame.up - (-frame.up).dot(z_axis) * z_axis;
            if (y_axis.norm() < 1e-9) {
                y_axis = frame.front - frame.front.dot(z_axis) * z_axis;
            }
            y_axis.normalize();
            const Eigen::Vector3d x_axis = y_axis.cross(z_axis);
            Eigen::Matrix3d world_to_cam;
            world_to_cam.row(0) = x_axis.transpose();
            world_to_cam.row(1) = y_axis.transpose();
            world_to_cam.row(2) = z_axis.transpose();
            // A small pan/tilt about the camera center moves the subject off
            // the optical axis without changing the body-relative viewpoint.
            const Eigen::Matrix3d pan = rot(Eigen::Vector3d::UnitY(), rng.uniform(-4.0, 4.0)) *
                                        rot(Eigen::Vector3d::UnitX(), rng.uniform(-4.0, 4.0));
            world_to_cam = pan * world_to_cam;

            PoseRecord record;
            record.dataset = profile.name;
            record.subject = "S" + std::to_string(i % 10);
            record.frame = static_cast<int64_t>(i);
            record.intrinsics = {focal, focal, 0.5 * profile.image_width, 0.5 * profile.image_height};
            for (int j = 0; j < kNumJoints; ++j) {
                record.pose3d[j] = world_to_cam * (scaled[j] - center);
            }

            bool inside = true;
            for (int j = 0; j < kNumJoints && inside; ++j) {
                inside = record.pose3d[j].z() > 0.0;
            }
            if (inside) {
                const Keypoints2d kp = project_to_2d(record.pose3d, record.intrinsics);
                for (const auto &p : kp) {
                    inside = inside && p.x() >= 0.0 && p.x() < profile.image_width && p.y() >= 0.0 &&
                             p.y() < profile.image_height;
                }
                record.pose2d = kp;
            }
            sample.record = std::move(record);
            sample.viewpoint = view;
            sample.distance_mm = 1000.0 * distance_m;
            sample.bone_sum_mm = bone_sum;
            if (inside) {
                break;
            }
        }
        out.push_back(std::move(sample));
    }
    return out;
}

std::vector<PoseRecord> generate(const SynthConfig &config) {
    std::vector<PoseRecord> records;
    for (auto &s : generate_samples(config)) {
        records.push_back(std::move(s.record));
    }
    return records;
}

} // namespace viewbias

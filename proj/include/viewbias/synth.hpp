#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viewbias/body_frame.hpp"
#include "viewbias/rng.hpp"
#include "viewbias/skeleton.hpp"

namespace viewbias {

/// One mixture component of an angular distribution, in degrees. A wrapped
/// normal with standard deviation `spread_deg`, or (uniform = true) a uniform
/// arc of half-width `spread_deg` around `center_deg`.
struct AngleComponent {
    double weight = 1.0;
    double center_deg = 0.0;
    double spread_deg = 180.0;
    bool uniform = true;
};

struct BiasProfile {
    std::string name;
    std::vector<AngleComponent> azimuth;
    // Elevation is a normal truncated to [-90, 90], or uniform on
    // [elevation_lo_deg, elevation_hi_deg] when elevation_uniform is set.
    double elevation_mean_deg = 0.0;
    double elevation_std_deg = 10.0;
    bool elevation_uniform = false;
    double elevation_lo_deg = -90.0;
    double elevation_hi_deg = 90.0;
    double distance_mean_m = 5.0;
    double distance_std_m = 1.0;
    double focal_mean_px = 1000.0;
    double focal_std_px = 0.0;
    double bone_sum_mean_mm = kDefaultBoneLengthSum;
    double bone_sum_std_mm = 0.0;
    int image_width = 1000;
    int image_height = 1000;

    // Throws kInvalidArgument when weights do not sum to 1, a std is
    // negative, or the mean distance is not positive.
    void validate() const;
};

/// Joint-angle ranges (degrees) of the pose pool. Every profile draws from
/// the same pool unless a test swaps it out.
struct PosePoolParams {
    double torso_lean_lo = -10, torso_lean_hi = 40;
    double torso_side_lo = -15, torso_side_hi = 15;
    double torso_twist_lo = -30, torso_twist_hi = 30;
    double head_tilt_lo = -20, head_tilt_hi = 30;
    double arm_abduction_lo = 0, arm_abduction_hi = 110;
    double arm_flexion_lo = -40, arm_flexion_hi = 120;
    double elbow_lo = 0, elbow_hi = 130;
    double hip_flexion_lo = -20, hip_flexion_hi = 90;
    double hip_abduction_lo = -10, hip_abduction_hi = 35;
    double knee_lo = 0, knee_hi = 120;

    // A pool that shares no poses with the default one (arms overhead).
    static PosePoolParams raised_arms();
};

struct SynthConfig {
    BiasProfile profile;
    size_t count = 1000;
    uint64_t seed = 0;
    PosePoolParams pool;
};

struct SynthSample {
    PoseRecord record;
    Viewpoint viewpoint; // as sampled
    double distance_mm = 0.0;
    double bone_sum_mm = 0.0;
};

std::vector<BiasProfile> builtin_profiles();
// Throws kInvalidArgument listing the valid names.
BiasProfile builtin_profile(const std::string &name);
std::vector<std::string> builtin_profile_names();

double sample_angle(const std::vector<AngleComponent> &mixture, Rng &rng);
Viewpoint sample_viewpoint(const BiasProfile &profile, Rng &rng);

// Root-relative pose from the pool with bone-length sum kDefaultBoneLengthSum.
// Person upright facing the camera maps to the identity body frame.
Pose sample_body_pose(const PosePoolParams &pool, Rng &rng);

/// Deterministic in config.seed; record i depends only on (seed, i).
std::vector<SynthSample> generate_samples(const SynthConfig &config);
std::vector<PoseRecord> generate(const SynthConfig &config);

// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

} // namespace viewbias

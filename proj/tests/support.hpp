#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "viewbias/body_frame.hpp"
#include "viewbias/rng.hpp"
#include "viewbias/skeleton.hpp"

namespace testing {

using namespace viewbias;

inline Eigen::Vector3d random_vec(Rng &rng, double scale = 1.0) {
    return {scale * rng.normal(), scale * rng.normal(), scale * rng.normal()};
}

// Haar-uniform rotation from a normalized Gaussian 4-vector, built with
// Eigen's own quaternion so it is independent of the library's conversions.
inline Eigen::Matrix3d random_rotation(Rng &rng) {
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return q.toRotationMatrix();
}

inline Pose random_pose(Rng &rng, double scale = 300.0, Eigen::Vector3d offset = {0, 0, 4000}) {
    Pose p;
    for (int j = 0; j < kNumJoints; ++j) p[j] = offset + random_vec(rng, scale);
    return p;
}

// Upright, facing the camera, pelvis at (0, 0, 4000).
inline Pose upright_pose() {
    Pose p;
    p[kPelvis] = {0, 0, 4000};
    p[kNeck] = {0, -500, 4000};
    p[kHead] = {0, -700, 4000};
    p[kLShoulder] = {150, -500, 4000};
    p[kRShoulder] = {-150, -500, 4000};
    p[kLElbow] = {200, -250, 4000};
    p[kRElbow] = {-200, -250, 4000};
    p[kLWrist] = {220, 0, 4000};
    p[kRWrist] = {-220, 0, 4000};
    p[kLHip] = {100, 0, 4000};
    p[kRHip] = {-100, 0, 4000};
    p[kLKnee] = {100, 450, 4000};
    p[kRKnee] = {-100, 450, 4000};
    p[kLAnkle] = {100, 900, 4000};
    return p;
}

// Central difference gradient of f at x.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd &)> &f, Eigen::VectorXd x,
                                   double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline double rel_error(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    const double denom = std::max({a.norm(), b.norm(), 1e-12});
    return (a - b).norm() / denom;
}

} // namespace testing

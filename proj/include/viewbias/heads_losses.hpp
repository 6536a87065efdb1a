#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "viewbias/body_frame.hpp"
#include "viewbias/skeleton.hpp"
#include "viewbias/view_cluster.hpp"

namespace viewbias {

// ---------------------------------------------------------------------------
// Soft-argmax over a 3D heatmap.

struct GridAxis {
    double start = 0.0; // coordinate of cell 0
    double step = 1.0;  // spacing between cell centers
};

/// Logits over a depth x height x width grid, stored z-major:
/// index = (z * height + y) * width + x.
struct HeatmapGrid {
    int depth = 64;
    int height = 64;
    int width = 64;
    GridAxis x_axis;
    GridAxis y_axis;
    GridAxis z_axis;
    std::vector<double> logits;

    HeatmapGrid(int d, int h, int w);
    int index(int z, int y, int x) const { return (z * height + y) * width + x; }
    Eigen::Vector3d cell_coordinates(int z, int y, int x) const;
};

/// Expected (x, y, z) cell coordinate under softmax(logits). The max logit is
/// subtracted first so large logits do not overflow.
Eigen::Vector3d soft_argmax(const HeatmapGrid &grid);

/// Gradient of upstream . soft_argmax(grid) with respect to every logit.
std::vector<double> soft_argmax_backward(const HeatmapGrid &grid, const Eigen::Vector3d &upstream);

// ---------------------------------------------------------------------------
// Depth codec: maps z in (-z_max, z_max) onto grid coordinates 0 .. bins-1.

struct DepthCodec {
    double z_max = 2400.0;
    int bins = 64;

    struct Encoded {
        double coordinate;
        bool clamped; // input was outside [-z_max, z_max]
    };

    Encoded encode(double z_mm) const;
    double decode(double coordinate) const;

    // Quantization into `bins` equal-width bins; decode_bin returns the bin center.
    int encode_bin(double z_mm) const;
    double decode_bin(int bin) const;
    double bin_width() const { return 2.0 * z_max / bins; }

    void validate() const;
};

// ---------------------------------------------------------------------------
// Losses. Every loss returns its value together with analytic gradients.

struct PoseLoss {
    double value = 0.0;
    PoseVector grad = PoseVector::Zero();
};

/// Mean over joints of the L1 norm of the per-joint difference. The
/// subgradient at a zero component is 0.
PoseLoss pose_loss(const Pose &pred, const Pose &target);
PoseLoss pose_loss(const PoseVector &pred, const PoseVector &target);

// Raw 4-vector emitted by a viewpoint head, before normalization.
using QuaternionHead = Eigen::Vector4d;

inline constexpr double kHeadNormFloor = 1e-8;

struct NormalizedHead {
    Quaternion q;              // unit, canonical
    Eigen::Matrix4d jacobian;  // d q / d raw
};

/// Normalizes and canonicalizes a raw head output. Below kHeadNormFloor the
/// result falls back to the identity quaternion with a zero Jacobian.
NormalizedHead normalize_head(const QuaternionHead &raw);

struct ViewLoss {
    double value = 0.0;
    QuaternionHead grad = QuaternionHead::Zero(); // w.r.t. the raw head output
};

/// Negative log-likelihood of cluster `c_star` under
/// p(c | q) = softmax_c(sign * mu_c . q). sign = -1 gives the literal
/// "farthest center wins" scoring; the default +1 scores by similarity.
ViewLoss viewpoint_class_loss(const QuaternionHead &raw, int c_star, const ClusterModel &model, double sign = 1.0);

// ||q - q_star||^2 with q the normalized head output.
ViewLoss viewpoint_reg_loss(const QuaternionHead &raw, const Quaternion &q_star);

enum class ViewLossMode { kClassification, kRegression, kBoth };

ViewLossMode parse_view_loss_mode(const std::string &text); // "C", "R", "C+R"
std::string to_string(ViewLossMode mode);

struct LossWeights {
    double lambda_q = 0.5;
    ViewLossMode mode = ViewLossMode::kClassification;
    double class_sign = 1.0;

    void validate() const;
};

struct CombinedLoss {
    double total = 0.0;
    double pose = 0.0;
    double view = 0.0; // unweighted L_q
    PoseVector grad_pose = PoseVector::Zero();
    QuaternionHead grad_head = QuaternionHead::Zero();
};

/// lambda_q * L_q + L_pose. `model` may be null unless the mode includes
/// classification, in which case kMissingClusterModel is thrown.
CombinedLoss combined_loss(const PoseVector &pred_pose, const PoseVector &target_pose, const QuaternionHead &raw,
                           int c_star, const Quaternion &q_star, const LossWeights &weights,
                           const ClusterModel *model);

} // namespace viewbias

#include "viewbias/heads_losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "viewbias/error.hpp"

namespace viewbias {

HeatmapGrid::HeatmapGrid(int d, int h, int w) : depth(d), height(h), width(w) {
    if (d < 1 || h < 1 || w < 1) {
        throw Error(ErrorCode::kInvalidArgument, "heatmap dimensions must be positive");
    }
    logits.assign(static_cast<size_t>(d) * h * w, 0.0);
}

Eigen::Vector3d HeatmapGrid::cell_coordinates(int z, int y, int x) const {
    return {x_axis.start + x * x_axis.step, y_axis.start + y * y_axis.step, z_axis.start + z * z_axis.step};
}

namespace {

std::vector<double> grid_softmax(const HeatmapGrid &grid) {
    const double max_logit = *std::max_element(grid.logits.begin(), grid.logits.end());
    std::vector<double> p(grid.logits.size());
    double total = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(grid.logits[i] - max_logit);
        total += p[i];
    }
    for (double &v : p) {
        v /= total;
    }
    return p;
}

} // namespace

Eigen::Vector3d soft_argmax(const HeatmapGrid &grid) {
    const std::vector<double> p = grid_softmax(grid);
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    for (int z = 0; z < grid.depth; ++z) {
        for (int y = 0; y < grid.height; ++y) {
            for (int x = 0; x < grid.width; ++x) {
                expected += p[grid.index(z, y, x)] * grid.cell_coordinates(z, y, x);
            }
        }
    }
    return expected;
}

std::vector<double> soft_argmax_backward(const HeatmapGrid &grid, const Eigen::Vector3d &upstream) {
    const std::vector<double> p = grid_softmax(grid);
    const Eigen::Vector3d expected = soft_argmax(grid);
    std::vector<double> grad(p.size());
    for (int z = 0; z < grid.depth; ++z) {
        for (int y = 0; y < grid.height; ++y) {
            for (int x = 0; x < grid.width; ++x) {
                const int i = grid.index(z, y, x);
                grad[i] = p[i] * upstream.dot(grid.cell_coordinates(z, y, x) - expected);
            }
        }
    }
    return grad;
}

void DepthCodec::validate() const {
    if (!(z_max > 0.0) || bins < 2) {
        throw Error(ErrorCode::kInvalidArgument, "depth codec needs z_max > 0 and bins >= 2");
    }
}

DepthCodec::Encoded DepthCodec::encode(double z_mm) const {
    const double clamped = std::clamp(z_mm, -z_max, z_max);
    return {(clamped + z_max) / (2.0 * z_max) * (bins - 1), clamped != z_mm};
}

double DepthCodec::decode(double coordinate) const { return coordinate / (bins - 1) * (2.0 * z_max) - z_max; }

int DepthCodec::encode_bin(double z_mm) const {
    const double clamped = std::clamp(z_mm, -z_max, z_max);
    const int bin = static_cast<int>(std::floor((clamped + z_max) / bin_width()));
    return std::min(bin, bins - 1);
}

double DepthCodec::decode_bin(int bin) const { return -z_max + (bin + 0.5) * bin_width(); }

PoseLoss pose_loss(const PoseVector &pred, const PoseVector &target) {
    PoseLoss out;
    const PoseVector diff = pred - target;
    out.value = diff.cwiseAbs().sum() / kNumJoints;
    for (int i = 0; i < diff.size(); ++i) {
        out.grad[i] = diff[i] > 0.0 ? 1.0 / kNumJoints : (diff[i] < 0.0 ? -1.0 / kNumJoints : 0.0);
    }
    return out;
}

PoseLoss pose_loss(const Pose &pred, const Pose &target) { return pose_loss(pred.flat(), target.flat()); }

NormalizedHead normalize_head(const QuaternionHead &raw) {
    NormalizedHead out;
    const double norm = raw.norm();
    if (!(norm >= kHeadNormFloor)) {
        out.q = Quaternion(1.0, 0.0, 0.0, 0.0);
        out.jacobian.setZero();
        return out;
    }
    const Quaternion unit = raw / norm;
    const Quaternion canonical = canonicalize_quaternion(unit);
    const double sign = canonical.dot(unit) < 0.0 ? -1.0 : 1.0;
    out.q = canonical;
    out.jacobian = sign * (Eigen::Matrix4d::Identity() - unit * unit.transpose()) / norm;
    return out;
}

ViewLoss viewpoint_class_loss(const QuaternionHead &raw, int c_star, const ClusterModel &model, double sign) {
    const int k = static_cast<int>(model.centers.size());
    if (c_star < 0 || c_star >= k) {
        throw Error(ErrorCode::kInvalidArgument, "target cluster out of range");
    }
    const NormalizedHead head = normalize_head(raw);

    std::vector<double> scores(k);
    double max_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        scores[c] = sign * model.centers[c].dot(head.q);
        max_score = std::max(max_score, scores[c]);
    }
    double total = 0.0;
    for (double s : scores) {
        total += std::exp(s - max_score);
    }
    const double log_z = max_score + std::log(total);

    ViewLoss out;
    out.value = log_z - scores[c_star];
    Quaternion grad_q = Quaternion::Zero();
    for (int c = 0; c < k; ++c) {
        const double p = std::exp(scores[c] - log_z);
        grad_q += (p - (c == c_star ? 1.0 : 0.0)) * sign * model.centers[c];
    }
    out.grad = head.jacobian.transpose() * grad_q;
    return out;
}

ViewLoss viewpoint_reg_loss(const QuaternionHead &raw, const Quaternion &q_star) {
    const NormalizedHead head = normalize_head(raw);
    const Quaternion diff = head.q - q_star;
    ViewLoss out;
    out.value = diff.squaredNorm();
    out.grad = head.jacobian.transpose() * (2.0 * diff);
    return out;
}

ViewLossMode parse_view_loss_mode(const std::string &text) {
    if (text == "C") {
        return ViewLossMode::kClassification;
    }
    if (text == "R") {
        return ViewLossMode::kRegression;
    }
    if (text == "C+R") {
        return ViewLossMode::kBoth;
    }
    throw Error(ErrorCode::kInvalidArgument, "viewpoint loss mode must be C, R or C+R, got '" + text + "'");
}

std::string to_string(ViewLossMode mode) {
    switch (mode) {
    case ViewLossMode::kClassification: return "C";
    case ViewLossMode::kRegression: return "R";
    case ViewLossMode::kBoth: return "C+R";
    }
    return "?";
}

void LossWeights::validate() const {
    if (!(lambda_q >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "lambda_q must be non-negative");
    }
}

CombinedLoss combined_loss(const PoseVector &pred_pose, const PoseVector &target_pose, const QuaternionHead &raw,
                           int c_star, const Quaternion &q_star, const LossWeights &weights,
                           const ClusterModel *model) {
    weights.validate();
    const bool use_class = weights.mode != ViewLossMode::kRegression;
    const bool use_reg = weights.mode != ViewLossMode::kClassification;
    if (use_class && model == nullptr) {
        throw Error(ErrorCode::kMissingClusterModel, "classification loss needs cluster centers");
    }

    const PoseLoss pose = pose_loss(pred_pose, target_pose);
    CombinedLoss out;
    out.pose = pose.value;
    out.grad_pose = pose.grad;
    if (use_class) {
        const ViewLoss view = viewpoint_class_loss(raw, c_star, *model, weights.class_sign);
        out.view += view.value;
        out.grad_head += view.grad;
    }
    if (use_reg) {
        const ViewLoss view = viewpoint_reg_loss(raw, q_star);
        out.view += view.value;
        out.grad_head += view.grad;
    }
    out.grad_head *= weights.lambda_q;
    out.total = weights.lambda_q * out.view + out.pose;
    return out;
}

} // namespace viewbias

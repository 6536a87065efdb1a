#include "viewbias/metrics.hpp"

#include <cstdio>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "viewbias/error.hpp"

namespace viewbias {

double mpjpe(const Pose &pred, const Pose &gt) {
    double total = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
        total += (pred[j] - gt[j]).norm();
    }
    return total / kNumJoints;
}

Alignment procrustes_align(const Pose &pred, const Pose &gt, AlignmentKind kind) {
    Eigen::Matrix<double, 3, kNumJoints> src;
    Eigen::Matrix<double, 3, kNumJoints> dst;
    for (int j = 0; j < kNumJoints; ++j) {
        src.col(j) = pred[j];
        dst.col(j) = gt[j];
    }
    const Eigen::Vector3d src_mean = src.rowwise().mean();
    const Eigen::Vector3d dst_mean = dst.rowwise().mean();
    const Eigen::Matrix<double, 3, kNumJoints> src_c = src.colwise() - src_mean;
    const Eigen::Matrix<double, 3, kNumJoints> dst_c = dst.colwise() - dst_mean;

    const Eigen::JacobiSVD<Eigen::Matrix<double, 3, kNumJoints>> spread(src_c);
    const Eigen::Vector3d sv = spread.singularValues();
    if (!(sv[0] > 0.0) || !(sv[1] > 1e-9 * sv[0])) {
        throw Error(ErrorCode::kDegenerateAlignment, "predicted joints are collinear");
    }

    const Eigen::Matrix3d cov = dst_c * src_c.transpose() / kNumJoints;
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
        d[2] = -1.0;
    }

    Alignment out;
    out.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    if (kind == AlignmentKind::kSimilarity) {
        const double src_var = src_c.squaredNorm() / kNumJoints;
        out.scale = svd.singularValues().dot(d) / src_var;
    }
    out.translation = dst_mean - out.scale * out.rotation * src_mean;
    for (int j = 0; j < kNumJoints; ++j) {
        out.aligned[j] = out.scale * out.rotation * pred[j] + out.translation;
    }
    return out;
}

double pa_mpjpe(const Pose &pred, const Pose &gt, AlignmentKind kind) {
    return mpjpe(procrustes_align(pred, gt, kind).aligned, gt);
}

double pck3d(const std::vector<Pose> &preds, const std::vector<Pose> &gts, double threshold, PckMode mode) {
    if (preds.size() != gts.size()) {
        throw Error(ErrorCode::kShapeMismatch, "prediction and ground-truth counts differ");
    }
    if (preds.empty()) {
        throw Error(ErrorCode::kEmptyInput, "PCK3D over zero samples");
    }
    size_t hits = 0;
    size_t total = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        if (mode == PckMode::kPerPose) {
            hits += mpjpe(preds[i], gts[i]) < threshold ? 1 : 0;
            ++total;
            continue;
        }
        for (int j = 0; j < kNumJoints; ++j) {
            hits += (preds[i][j] - gts[i][j]).norm() < threshold ? 1 : 0;
            ++total;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

EvalReport evaluate_poses(const std::vector<Pose> &preds, const std::vector<Pose> &gts, const EvalOptions &options) {
    if (preds.size() != gts.size()) {
        throw Error(ErrorCode::kShapeMismatch, "prediction and ground-truth counts differ");
    }
    if (preds.empty()) {
        throw Error(ErrorCode::kEmptyInput, "evaluation over zero samples");
    }
    EvalReport report;
    report.count = preds.size();
    std::array<size_t, kNumJoints> hits{};
    for (size_t i = 0; i < preds.size(); ++i) {
        const Pose aligned = procrustes_align(preds[i], gts[i], options.alignment).aligned;
        for (int j = 0; j < kNumJoints; ++j) {
            const double err = (preds[i][j] - gts[i][j]).norm();
            report.joint_mpjpe_mm[j] += err;
            report.joint_pa_mpjpe_mm[j] += (aligned[j] - gts[i][j]).norm();
            hits[j] += err < options.pck_threshold ? 1 : 0;
        }
    }
    const double n = static_cast<double>(preds.size());
    for (int j = 0; j < kNumJoints; ++j) {
        report.joint_mpjpe_mm[j] /= n;
        report.joint_pa_mpjpe_mm[j] /= n;
        report.joint_pck3d[j] = static_cast<double>(hits[j]) / n;
        report.mpjpe_mm += report.joint_mpjpe_mm[j];
        report.pa_mpjpe_mm += report.joint_pa_mpjpe_mm[j];
    }
    report.mpjpe_mm /= kNumJoints;
    report.pa_mpjpe_mm /= kNumJoints;
    report.pck3d = pck3d(preds, gts, options.pck_threshold, options.pck_mode);
    return report;
}

nlohmann::json eval_report_to_json(const EvalReport &report) {
    nlohmann::json per_joint = nlohmann::json::object();
    for (int j = 0; j < kNumJoints; ++j) {
        per_joint[std::string(kJointNames[j])] = {{"mpjpe_mm", report.joint_mpjpe_mm[j]},
                                                  {"pa_mpjpe_mm", report.joint_pa_mpjpe_mm[j]},
                                                  {"pck3d", report.joint_pck3d[j]}};
    }
    return {{"mpjpe_mm", report.mpjpe_mm},
            {"pa_mpjpe_mm", report.pa_mpjpe_mm},
            {"pck3d", report.pck3d},
            {"count", report.count},
            {"per_joint", std::move(per_joint)}};
}

std::string eval_csv_header() { return "train_set,test_set,count,mpjpe_mm,pa_mpjpe_mm,pck3d"; }

std::string eval_csv_row(const std::string &train_set, const std::string &test_set, const EvalReport &report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.4f,%.4f,%.6f", train_set.c_str(), test_set.c_str(), report.count,
                  report.mpjpe_mm, report.pa_mpjpe_mm, report.pck3d);
    return buf;
}

} // namespace viewbias

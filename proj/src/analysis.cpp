#include "viewbias/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "viewbias/error.hpp"

namespace viewbias {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

HistogramAxis make_axis(double lo, double hi, int bins) {
    if (bins < 1) {
        throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
    }
    HistogramAxis axis;
    axis.lo = lo;
    axis.hi = hi;
    axis.counts.assign(static_cast<size_t>(bins), 0);
    return axis;
}

BinnedError make_binned(double lo, double hi, int bins) {
    BinnedError b;
    b.lo = lo;
    b.hi = hi;
    b.counts.assign(static_cast<size_t>(bins), 0);
    b.mean_error.assign(static_cast<size_t>(bins), std::nullopt);
    return b;
}

} // namespace

void RunningStats::add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

double RunningStats::stddev() const { return count < 2 ? 0.0 : std::sqrt(m2 / static_cast<double>(count - 1)); }

DatasetStats compute_stats(const std::vector<PoseRecord> &records) {
    if (records.empty()) {
        throw Error(ErrorCode::kEmptyInput, "statistics over zero records");
    }
    RunningStats distance, focal, bones;
    for (const auto &r : records) {
        distance.add(r.pose3d[kPelvis].norm() / 1000.0);
        focal.add(r.intrinsics.fx);
        bones.add(bone_length_sum(r.pose3d) / 1000.0);
    }
    DatasetStats s;
    s.dataset = records.front().dataset;
    s.count = records.size();
    s.distance_mean_m = distance.mean;
    s.distance_std_m = distance.stddev();
    s.focal_mean = focal.mean;
    s.focal_std = focal.stddev();
    s.bone_length_mean_m = bones.mean;
    s.bone_length_std_m = bones.stddev();
    return s;
}

std::string stats_csv_header() {
    return "dataset,count,camera_distance_mean_m,camera_distance_std_m,focal_length_mean,focal_length_std,"
           "bone_length_mean_m,bone_length_std_m";
}

std::string stats_csv_row(const DatasetStats &s) {
    return s.dataset + "," + std::to_string(s.count) + "," + format_double(s.distance_mean_m) + "," +
           format_double(s.distance_std_m) + "," + format_double(s.focal_mean) + "," + format_double(s.focal_std) +
           "," + format_double(s.bone_length_mean_m) + "," + format_double(s.bone_length_std_m);
}

int HistogramAxis::bin_of(double value) const {
    const int bins = static_cast<int>(counts.size());
    const int bin = static_cast<int>(std::floor((value - lo) / bin_width()));
    return std::clamp(bin, 0, bins - 1);
}

Viewpoint record_viewpoint(const PoseRecord &record) {
    return viewpoint_from_frame(compute_body_frame(record.pose3d), record.pose3d[kPelvis]);
}

ViewHistogram view_histogram(const std::vector<PoseRecord> &records, int azimuth_bins, int elevation_bins) {
    if (records.empty()) {
        throw Error(ErrorCode::kEmptyInput, "histogram over zero records");
    }
    ViewHistogram h;
    h.azimuth = make_axis(-180.0, 180.0, azimuth_bins);
    h.elevation = make_axis(-90.0, 90.0, elevation_bins);
    h.joint.assign(static_cast<size_t>(azimuth_bins), std::vector<size_t>(static_cast<size_t>(elevation_bins), 0));
    for (const auto &r : records) {
        Viewpoint v;
        try {
            v = record_viewpoint(r);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::kDegenerateFrame) {
                throw;
            }
            ++h.skipped;
            continue;
        }
        const int a = h.azimuth.bin_of(v.azimuth_deg);
        const int e = h.elevation.bin_of(v.elevation_deg);
        ++h.azimuth.counts[a];
        ++h.elevation.counts[e];
        ++h.joint[a][e];
    }
    return h;
}

void write_histogram_csv(std::ostream &out, const HistogramAxis &axis) {
    out << "bin_start,bin_end,count\n";
    for (size_t k = 0; k < axis.counts.size(); ++k) {
        const double start = axis.lo + static_cast<double>(k) * axis.bin_width();
        out << format_double(start) << ',' << format_double(start + axis.bin_width()) << ',' << axis.counts[k] << '\n';
    }
}

FeatureMode parse_feature_mode(const std::string &text) {
    for (FeatureMode m : all_feature_modes()) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw Error(ErrorCode::kInvalidArgument,
                "unknown feature mode '" + text +
                    "'; expected root-relative, root-relative+size-normalized, body-centered or "
                    "body-centered+size-normalized");
}

std::string to_string(FeatureMode mode) {
    switch (mode) {
    case FeatureMode::kRootRelative: return "root-relative";
    case FeatureMode::kRootRelativeScaled: return "root-relative+size-normalized";
    case FeatureMode::kBodyCentered: return "body-centered";
    case FeatureMode::kBodyCenteredScaled: return "body-centered+size-normalized";
    }
    return "?";
}

std::vector<FeatureMode> all_feature_modes() {
    return {FeatureMode::kRootRelative, FeatureMode::kRootRelativeScaled, FeatureMode::kBodyCentered,
            FeatureMode::kBodyCenteredScaled};
}

FeatureMatrix export_pose_features(const std::vector<PoseRecord> &records, FeatureMode mode) {
    if (records.empty()) {
        throw Error(ErrorCode::kEmptyInput, "feature export over zero records");
    }
    const bool body = mode == FeatureMode::kBodyCentered || mode == FeatureMode::kBodyCenteredScaled;
    const bool scaled = mode == FeatureMode::kRootRelativeScaled || mode == FeatureMode::kBodyCenteredScaled;
    FeatureMatrix out;
    for (const auto &r : records) {
        Pose pose = root_relative(r.pose3d);
        try {
            if (body) {
                pose = to_body_coordinates(r.pose3d, compute_body_frame(r.pose3d));
            }
            if (scaled) {
                pose = normalize_skeleton(pose, kDefaultBoneLengthSum);
            }
        } catch (const Error &e) {
            if (e.code() != ErrorCode::kDegenerateFrame && e.code() != ErrorCode::kDegenerateSkeleton) {
                throw;
            }
            ++out.skipped;
            continue;
        }
        out.tags.push_back(r.dataset);
        out.rows.push_back(pose.flat());
    }
    return out;
}

void write_feature_csv(std::ostream &out, const FeatureMatrix &features) {
    out << "dataset";
    for (int j = 0; j < kNumJoints; ++j) {
        for (const char *axis : {"x", "y", "z"}) {
            out << ',' << kJointNames[j] << '_' << axis;
        }
    }
    out << '\n';
    for (size_t i = 0; i < features.rows.size(); ++i) {
        out << features.tags[i];
        for (int k = 0; k < features.rows[i].size(); ++k) {
            out << ',' << format_double(features.rows[i][k]);
        }
        out << '\n';
    }
}

ViewErrorBins error_by_viewpoint(const std::vector<ViewError> &errors, int azimuth_bins, int elevation_bins) {
    if (errors.empty()) {
        throw Error(ErrorCode::kEmptyInput, "error binning over zero samples");
    }
    ViewErrorBins out;
    out.azimuth = make_binned(-180.0, 180.0, azimuth_bins);
    out.elevation = make_binned(-90.0, 90.0, elevation_bins);
    const HistogramAxis az_axis = make_axis(-180.0, 180.0, azimuth_bins);
    const HistogramAxis el_axis = make_axis(-90.0, 90.0, elevation_bins);
    std::vector<double> az_sum(static_cast<size_t>(azimuth_bins), 0.0);
    std::vector<double> el_sum(static_cast<size_t>(elevation_bins), 0.0);
    for (const auto &e : errors) {
        const int a = az_axis.bin_of(e.view.azimuth_deg);
        const int l = el_axis.bin_of(e.view.elevation_deg);
        ++out.azimuth.counts[a];
        az_sum[a] += e.error_mm;
        ++out.elevation.counts[l];
        el_sum[l] += e.error_mm;
    }
    for (size_t k = 0; k < az_sum.size(); ++k) {
        if (out.azimuth.counts[k] > 0) {
            out.azimuth.mean_error[k] = az_sum[k] / static_cast<double>(out.azimuth.counts[k]);
        }
    }
    for (size_t k = 0; k < el_sum.size(); ++k) {
        if (out.elevation.counts[k] > 0) {
            out.elevation.mean_error[k] = el_sum[k] / static_cast<double>(out.elevation.counts[k]);
        }
    }
    return out;
}

BinnedError error_reduction(const BinnedError &baseline, const BinnedError &treated) {
    if (baseline.counts.size() != treated.counts.size() || baseline.lo != treated.lo || baseline.hi != treated.hi) {
        throw Error(ErrorCode::kShapeMismatch, "bin layouts differ");
    }
    BinnedError out = make_binned(baseline.lo, baseline.hi, static_cast<int>(baseline.counts.size()));
    for (size_t k = 0; k < out.counts.size(); ++k) {
        out.counts[k] = std::min(baseline.counts[k], treated.counts[k]);
        if (baseline.mean_error[k] && treated.mean_error[k]) {
            out.mean_error[k] = *baseline.mean_error[k] - *treated.mean_error[k];
        }
    }
    return out;
}

void write_binned_error_csv(std::ostream &out, const BinnedError &bins) {
    out << "bin_start,bin_end,count,mean_error_mm\n";
    const double width = (bins.hi - bins.lo) / static_cast<double>(bins.counts.size());
    for (size_t k = 0; k < bins.counts.size(); ++k) {
        const double start = bins.lo + static_cast<double>(k) * width;
        out << format_double(start) << ',' << format_double(start + width) << ',' << bins.counts[k] << ',';
        if (bins.mean_error[k]) {
            out << format_double(*bins.mean_error[k]);
        }
        out << '\n';
    }
}

} // namespace viewbias

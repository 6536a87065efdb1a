#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "viewbias/body_frame.hpp"
#include "viewbias/skeleton.hpp"

namespace viewbias {

struct RunningStats {
    size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    // Sample standard deviation (n - 1); 0 for fewer than two values.
    double stddev() const;
};

/// Per-dataset camera and skeleton statistics. Distances and bone lengths
/// are reported in meters, focal lengths in pixels.
struct DatasetStats {
    std::string dataset;
    size_t count = 0;
    double distance_mean_m = 0.0;
    double distance_std_m = 0.0;
    double focal_mean = 0.0;
    double focal_std = 0.0;
    double bone_length_mean_m = 0.0;
    double bone_length_std_m = 0.0;
};

// Camera distance is the pelvis range ||pelvis_cam||. Throws kEmptyInput.
DatasetStats compute_stats(const std::vector<PoseRecord> &records);

std::string stats_csv_header();
std::string stats_csv_row(const DatasetStats &stats);

struct HistogramAxis {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<size_t> counts;

    double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
    // Half-open bins [lo + k w, lo + (k+1) w); `hi` itself falls in the last bin.
    int bin_of(double value) const;
};

struct ViewHistogram {
    HistogramAxis azimuth;   // (-180, 180]
    HistogramAxis elevation; // [-90, 90]
    // joint[a][e]: counts by azimuth bin a and elevation bin e.
    std::vector<std::vector<size_t>> joint;
    size_t skipped = 0; // records with a degenerate body frame
};

Viewpoint record_viewpoint(const PoseRecord &record);

/// Throws kEmptyInput on no records. Records whose body frame is undefined
/// are counted in `skipped` instead of a bin.
ViewHistogram view_histogram(const std::vector<PoseRecord> &records, int azimuth_bins = 36, int elevation_bins = 18);

void write_histogram_csv(std::ostream &out, const HistogramAxis &axis);

enum class FeatureMode {
    kRootRelative,
    kRootRelativeScaled,
    kBodyCentered,
    kBodyCenteredScaled,
};

FeatureMode parse_feature_mode(const std::string &text);
std::string to_string(FeatureMode mode);
std::vector<FeatureMode> all_feature_modes();

struct FeatureMatrix {
    std::vector<std::string> tags;
    std::vector<PoseVector> rows; // mm, joint-major
    size_t skipped = 0;
};

/// Flattens every record after the chosen normalization chain: root
/// subtraction, optional rotation into the body frame, optional rescaling to
/// the default skeleton size.
FeatureMatrix export_pose_features(const std::vector<PoseRecord> &records, FeatureMode mode);

// dataset column followed by 42 coordinates named <joint>_<axis>.
void write_feature_csv(std::ostream &out, const FeatureMatrix &features);

struct ViewError {
    Viewpoint view;
    double error_mm = 0.0;
};

struct BinnedError {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<size_t> counts;
    std::vector<std::optional<double>> mean_error; // empty bins stay unset
};

struct ViewErrorBins {
    BinnedError azimuth;
    BinnedError elevation;
};

// Throws kEmptyInput on no samples.
ViewErrorBins error_by_viewpoint(const std::vector<ViewError> &errors, int azimuth_bins = 36,
                                 int elevation_bins = 18);

/// Per-bin baseline minus treated. Both inputs must share bin layout; a bin
/// is set only where both have data.
BinnedError error_reduction(const BinnedError &baseline, const BinnedError &treated);

// bin_start,bin_end,count,mean_error_mm (blank for empty bins)
void write_binned_error_csv(std::ostream &out, const BinnedError &bins);

} // namespace viewbias

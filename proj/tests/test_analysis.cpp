#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <sstream>

#include "support.hpp"
#include "viewbias/analysis.hpp"
#include "viewbias/error.hpp"
#include "viewbias/synth.hpp"

using namespace viewbias;
using namespace testing;

namespace {

PoseRecord record_at(const Pose &pose, const std::string &tag = "t", double focal = 1000.0) {
    PoseRecord r;
    r.dataset = tag;
    r.intrinsics = CameraIntrinsics{focal, focal, 500.0, 500.0};
    r.pose3d = pose;
    return r;
}

Pose moved(const Pose &p, double s, const Eigen::Matrix3d &R, const Eigen::Vector3d &pelvis) {
    Pose out;
    for (int j = 0; j < kNumJoints; ++j) out[j] = pelvis + s * R * (p[j] - p[kPelvis]);
    return out;
}

// Upright pose turned about the vertical axis so the camera sees it at `azimuth_deg`.
Pose turned(double azimuth_deg, double depth = 4000.0) {
    const Eigen::Matrix3d R = axis_angle_rotation({0, 1, 0}, azimuth_deg * std::numbers::pi / 180.0);
    return moved(upright_pose(), 1.0, R, {0, 0, depth});
}

std::vector<size_t> column_sums(const ViewHistogram &h, bool by_azimuth) {
    std::vector<size_t> out(by_azimuth ? h.joint.size() : h.joint[0].size(), 0);
    for (size_t a = 0; a < h.joint.size(); ++a)
        for (size_t e = 0; e < h.joint[a].size(); ++e) out[by_azimuth ? a : e] += h.joint[a][e];
    return out;
}

} // namespace

TEST_CASE("running statistics") {
    RunningStats s;
    CHECK(s.stddev() == 0.0);
    s.add(4.0);
    CHECK(s.stddev() == 0.0);
    s.add(6.0);
    CHECK(s.mean == 5.0);
    CHECK(s.stddev() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("dataset stats") {
    Pose p = upright_pose();
    p = moved(p, 1.0, Eigen::Matrix3d::Identity(), {0, 0, 5200});
    const DatasetStats one = compute_stats({record_at(p, "x", 1146.8)});
    CHECK(one.dataset == "x");
    CHECK(one.count == 1);
    CHECK(one.distance_mean_m == doctest::Approx(5.2).epsilon(1e-14));
    CHECK(one.distance_std_m == 0.0);
    CHECK(one.focal_mean == 1146.8);
    CHECK(one.bone_length_mean_m == doctest::Approx(bone_length_sum(p) / 1000.0).epsilon(1e-14));

    const DatasetStats two = compute_stats({record_at(moved(p, 1, Eigen::Matrix3d::Identity(), {0, 0, 4000})),
                                            record_at(moved(p, 1, Eigen::Matrix3d::Identity(), {0, 0, 6000}))});
    CHECK(two.distance_mean_m == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(two.distance_std_m == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(two.bone_length_std_m < 1e-12);

    try {
        compute_stats({});
        FAIL("expected kEmptyInput");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::kEmptyInput);
    }

    const std::string row = stats_csv_row(two), header = stats_csv_header();
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
    CHECK(stats_csv_header().rfind("dataset,count,", 0) == 0);
}

TEST_CASE("h36m-like stats at n=50,000 and permutation invariance") {
    SynthConfig c;
    c.profile = builtin_profile("h36m-like");
    c.count = 50000;
    c.seed = 21;
    auto recs = generate(c);
    const DatasetStats s = compute_stats(recs);
    CHECK(std::abs(s.distance_mean_m - 5.2) < 0.05);
    CHECK(std::abs(s.distance_std_m - 0.8) < 0.05);
    CHECK(std::abs(s.focal_mean - 1146.8) < 5.0);
    CHECK(std::abs(s.bone_length_mean_m - 3.9) < 2.0 * 0.1 / std::sqrt(50000.0));

    // Two-pass oracle for mean and sample std.
    double mean = 0.0, var = 0.0;
    for (const auto &r : recs) mean += r.pose3d[kPelvis].norm() / 1000.0;
    mean /= recs.size();
    for (const auto &r : recs) var += std::pow(r.pose3d[kPelvis].norm() / 1000.0 - mean, 2);
    var /= recs.size() - 1;
    CHECK(s.distance_mean_m == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.distance_std_m == doctest::Approx(std::sqrt(var)).epsilon(1e-9));

    Rng rng(3);
    for (size_t i = recs.size() - 1; i > 0; --i) std::swap(recs[i], recs[rng.below(i + 1)]);
    const DatasetStats shuffled = compute_stats(recs);
    CHECK(shuffled.distance_mean_m == doctest::Approx(s.distance_mean_m).epsilon(1e-12));
    CHECK(shuffled.distance_std_m == doctest::Approx(s.distance_std_m).epsilon(1e-9));
    CHECK(shuffled.focal_std == doctest::Approx(s.focal_std).epsilon(1e-9));
}

TEST_CASE("viewpoint histogram") {
    const ViewHistogram front = view_histogram({record_at(upright_pose())});
    CHECK(front.azimuth.counts.size() == 36);
    CHECK(front.elevation.counts.size() == 18);
    CHECK(front.azimuth.counts[18] == 1); // [0, 10)
    CHECK(front.elevation.counts[9] == 1); // [0, 10)

    const ViewHistogram side = view_histogram({record_at(turned(95.0))});
    const double side_az = record_viewpoint(record_at(turned(95.0))).azimuth_deg;
    CHECK(std::abs(side_az) == doctest::Approx(95.0).epsilon(1e-9));
    CHECK(side.azimuth.counts[side_az > 0 ? 27 : 8] == 1);

    // Uniform turns about the vertical axis fill the azimuth bins evenly.
    Rng rng(8);
    std::vector<PoseRecord> recs;
    for (int i = 0; i < 72000; ++i) recs.push_back(record_at(turned(rng.uniform(-180.0, 180.0))));
    Pose flat; // degenerate: every joint at one point
    for (auto &j : flat.joints) j = {0, 0, 3000};
    recs.push_back(record_at(flat));
    const ViewHistogram h = view_histogram(recs);
    const auto [lo, hi] = std::minmax_element(h.azimuth.counts.begin(), h.azimuth.counts.end());
    CHECK(static_cast<double>(*hi) / static_cast<double>(*lo) < 1.3);
    CHECK(h.skipped == 1);

    size_t total_a = 0, total_e = 0;
    for (size_t c : h.azimuth.counts) total_a += c;
    for (size_t c : h.elevation.counts) total_e += c;
    CHECK(total_a + h.skipped == recs.size());
    CHECK(total_e == total_a);
    CHECK(column_sums(h, true) == h.azimuth.counts);
    CHECK(column_sums(h, false) == h.elevation.counts);

    std::ostringstream out;
    write_histogram_csv(out, h.azimuth);
    const std::string csv = out.str();
    CHECK(csv.rfind("bin_start,bin_end,count\n-180.000000,-170.000000,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 37);

    CHECK_THROWS_AS(view_histogram({}), Error);
}

TEST_CASE("histogram bin edges") {
    HistogramAxis a{-180.0, 180.0, std::vector<size_t>(36, 0)};
    CHECK(a.bin_of(-180.0) == 0);
    CHECK(a.bin_of(-170.0) == 1);
    CHECK(a.bin_of(180.0) == 35);
    CHECK(a.bin_of(0.0) == 18);
    CHECK(a.bin_of(-1e-9) == 17);
}

TEST_CASE("pose features") {
    Rng rng(4);
    std::vector<PoseRecord> recs;
    for (int i = 0; i < 200; ++i) {
        const Pose p = moved(upright_pose(), rng.uniform(0.7, 1.3), random_rotation(rng),
                             Eigen::Vector3d(0, 0, 4000) + random_vec(rng, 300));
        recs.push_back(record_at(p, i % 2 ? "a" : "b"));
    }

    for (FeatureMode m : all_feature_modes()) {
        CHECK(parse_feature_mode(to_string(m)) == m);
        const FeatureMatrix f = export_pose_features(recs, m);
        REQUIRE(f.rows.size() == recs.size());
        CHECK(f.tags[0] == "b");
        for (const auto &row : f.rows) CHECK(row.segment<3>(3 * kPelvis).norm() < 1e-9);
    }
    CHECK_THROWS_AS(parse_feature_mode("spherical"), Error);

    const FeatureMatrix body = export_pose_features(recs, FeatureMode::kBodyCentered);
    const FeatureMatrix both = export_pose_features(recs, FeatureMode::kBodyCenteredScaled);
    const FeatureMatrix scaled = export_pose_features(recs, FeatureMode::kRootRelativeScaled);
    for (size_t i = 0; i < recs.size(); ++i) {
        const Pose b = Pose::from_flat(body.rows[i]);
        CHECK((compute_body_frame(b).q - Quaternion(1, 0, 0, 0)).norm() < 1e-6);
        CHECK(bone_length_sum(b) == doctest::Approx(bone_length_sum(recs[i].pose3d)).epsilon(1e-12));
        CHECK(bone_length_sum(Pose::from_flat(scaled.rows[i])) == doctest::Approx(kDefaultBoneLengthSum).epsilon(1e-12));
        CHECK(bone_length_sum(Pose::from_flat(both.rows[i])) == doctest::Approx(kDefaultBoneLengthSum).epsilon(1e-12));
        // Every record is a similarity copy of one pose, so the fully normalized rows coincide.
        CHECK((both.rows[i] - both.rows[0]).cwiseAbs().maxCoeff() < 1e-6);
    }

    // Pre-rotation leaves body-centered features alone; pre-scaling leaves size-normalized ones alone.
    std::vector<PoseRecord> rotated = recs, grown = recs;
    for (auto &r : rotated) r.pose3d = moved(r.pose3d, 1.0, random_rotation(rng), r.pose3d[kPelvis]);
    for (auto &r : grown) r.pose3d = moved(r.pose3d, 1.7, Eigen::Matrix3d::Identity(), r.pose3d[kPelvis]);
    const FeatureMatrix body_rot = export_pose_features(rotated, FeatureMode::kBodyCentered);
    const FeatureMatrix scaled_grown = export_pose_features(grown, FeatureMode::kRootRelativeScaled);
    for (size_t i = 0; i < recs.size(); ++i) {
        CHECK((body_rot.rows[i] - body.rows[i]).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((scaled_grown.rows[i] - scaled.rows[i]).cwiseAbs().maxCoeff() < 1e-6);
    }

    std::ostringstream out;
    write_feature_csv(out, body);
    std::istringstream in(out.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(std::count(header.begin(), header.end(), ',') == 42);
    CHECK(std::count(first.begin(), first.end(), ',') == 42);
    CHECK(header.rfind("dataset,", 0) == 0);

    std::vector<PoseRecord> with_bad = recs;
    Pose flat;
    with_bad.push_back(record_at(flat));
    CHECK(export_pose_features(with_bad, FeatureMode::kBodyCentered).skipped == 1);
    CHECK_THROWS_AS(export_pose_features({}, FeatureMode::kRootRelative), Error);
}

TEST_CASE("error by viewpoint") {
    Rng rng(9);
    std::vector<ViewError> flat, tilted, treated;
    for (int i = 0; i < 20000; ++i) {
        const Viewpoint v{rng.uniform(-179.9, 180.0), rng.uniform(-40.0, 40.0)};
        flat.push_back({v, 80.0});
        tilted.push_back({v, 50.0 + std::abs(v.azimuth_deg)});
        treated.push_back({v, 45.0 + 0.8 * std::abs(v.azimuth_deg)});
    }

    const ViewErrorBins f = error_by_viewpoint(flat);
    for (const auto &m : f.azimuth.mean_error) {
        REQUIRE(m.has_value());
        CHECK(*m == doctest::Approx(80.0).epsilon(1e-12));
    }
    // Nothing beyond +-40 degrees of elevation.
    CHECK_FALSE(f.elevation.mean_error[0].has_value());
    CHECK(f.elevation.counts[0] == 0);
    CHECK_FALSE(f.elevation.mean_error[17].has_value());

    // Error grows with |azimuth|: means on each side are monotone away from 0.
    const ViewErrorBins t = error_by_viewpoint(tilted);
    for (int b = 18; b < 35; ++b) CHECK(*t.azimuth.mean_error[b + 1] > *t.azimuth.mean_error[b]);
    for (int b = 17; b > 0; --b) CHECK(*t.azimuth.mean_error[b - 1] > *t.azimuth.mean_error[b]);

    // Count-weighted bin means reproduce the overall mean.
    double overall = 0.0, weighted = 0.0;
    size_t n = 0;
    for (const auto &e : tilted) overall += e.error_mm / tilted.size();
    for (size_t b = 0; b < t.azimuth.counts.size(); ++b) {
        n += t.azimuth.counts[b];
        if (t.azimuth.mean_error[b]) weighted += *t.azimuth.mean_error[b] * t.azimuth.counts[b];
    }
    CHECK(n == tilted.size());
    CHECK(weighted / n == doctest::Approx(overall).epsilon(1e-12));

    const ViewErrorBins r = error_by_viewpoint(treated);
    const BinnedError red = error_reduction(t.azimuth, r.azimuth);
    for (size_t b = 0; b < red.counts.size(); ++b) {
        CHECK(*red.mean_error[b] == doctest::Approx(*t.azimuth.mean_error[b] - *r.azimuth.mean_error[b]).epsilon(1e-12));
        CHECK(*red.mean_error[b] > 0.0);
    }
    const BinnedError red_el = error_reduction(t.elevation, r.elevation);
    CHECK_FALSE(red_el.mean_error[0].has_value());
    CHECK_THROWS_AS(error_reduction(t.azimuth, r.elevation), Error);

    std::ostringstream out;
    write_binned_error_csv(out, red_el);
    CHECK(out.str().rfind("bin_start,bin_end,count,mean_error_mm\n-90.000000,-80.000000,0,\n", 0) == 0);
    CHECK_THROWS_AS(error_by_viewpoint({}), Error);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "viewbias/error.hpp"
#include "viewbias/record_io.hpp"

using namespace viewbias;
using namespace testing;

TEST_CASE("root_relative translates the pelvis to the origin") {
    Pose p;
    p[kPelvis] = {0, 0, 4000};
    p[kHead] = {0, -800, 4000};
    const Pose r = root_relative(p);
    CHECK(r[kPelvis].norm() == 0.0);
    CHECK(r[kHead].isApprox(Eigen::Vector3d(0, -800, 0)));

    Rng rng(3);
    const Pose rooted = root_relative(random_pose(rng));
    const Pose again = root_relative(rooted);
    for (int j = 0; j < kNumJoints; ++j) CHECK(again[j] == rooted[j]);
}

TEST_CASE("root_relative preserves every pairwise distance") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Pose p = random_pose(rng);
        const Pose r = root_relative(p);
        CHECK(r[kPelvis].norm() == 0.0);
        for (int a = 0; a < kNumJoints; ++a) {
            for (int b = 0; b < kNumJoints; ++b) {
                CHECK((r[a] - r[b]).norm() == doctest::Approx((p[a] - p[b]).norm()).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("bone_length_sum") {
    Pose zero;
    CHECK(bone_length_sum(zero) == 0.0);

    Rng rng(5);
    const Pose p = random_pose(rng);
    Pose doubled;
    for (int j = 0; j < kNumJoints; ++j) doubled[j] = 2.0 * p[j];
    CHECK(bone_length_sum(doubled) == doctest::Approx(2.0 * bone_length_sum(p)).epsilon(1e-12));

    // Brute force over the edge list written out by hand.
    const int edges[13][2] = {{0, 1}, {1, 2}, {1, 3}, {1, 4}, {3, 5}, {4, 6}, {5, 7},
                              {6, 8}, {0, 9}, {0, 10}, {9, 11}, {10, 12}, {11, 13}};
    double sum = 0.0;
    for (const auto &e : edges) sum += (p[e[0]] - p[e[1]]).norm();
    CHECK(bone_length_sum(p) == doctest::Approx(sum).epsilon(1e-12));

    // Invariance under rooting and rotation.
    CHECK(bone_length_sum(root_relative(p)) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(bone_length_sum(apply_rotation(random_rotation(rng), p)) == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("normalize_skeleton scales to the target") {
    Rng rng(7);
    const Pose p = random_pose(rng);
    const double s = bone_length_sum(p);
    Pose big;
    for (int j = 0; j < kNumJoints; ++j) big[j] = p[j] * (7400.0 / s);
    const Pose half = normalize_skeleton(big, 3700.0);
    const Pose rb = root_relative(big);
    for (int j = 0; j < kNumJoints; ++j) CHECK((half[j] - 0.5 * rb[j]).norm() < 1e-9);
    CHECK(half[kPelvis].norm() == 0.0);

    const Pose again = normalize_skeleton(half, 3700.0);
    for (int j = 0; j < kNumJoints; ++j) CHECK((again[j] - half[j]).norm() < 1e-9 * 3700.0);

    for (int trial = 0; trial < 100; ++trial) {
        const Pose n = normalize_skeleton(random_pose(rng), 3700.0);
        CHECK(std::abs(bone_length_sum(n) / 3700.0 - 1.0) < 1e-9);
    }
    CHECK(bone_length_sum(normalize_skeleton(p)) == doctest::Approx(kDefaultBoneLengthSum));

    Pose zero;
    CHECK_THROWS_AS(normalize_skeleton(zero), Error);
}

TEST_CASE("pinhole projection") {
    CameraIntrinsics K{1000, 1000, 500, 500};
    Pose p;
    for (int j = 0; j < kNumJoints; ++j) p[j] = {0, 0, 1000};
    p[1] = {100, 0, 1000};
    const Keypoints2d kp = project_to_2d(p, K);
    CHECK(kp[0].isApprox(Eigen::Vector2d(500, 500)));
    CHECK(kp[1].isApprox(Eigen::Vector2d(600, 500)));

    p[3] = {0, 0, 0};
    CHECK_THROWS_AS(project_to_2d(p, K), Error);
    try {
        project_to_2d(p, K);
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::kBehindCamera);
    }

    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        CameraIntrinsics k2{rng.uniform(300, 2000), rng.uniform(300, 2000), rng.uniform(0, 1000),
                            rng.uniform(0, 1000)};
        const Pose q = random_pose(rng, 400.0, {0, 0, 5000});
        std::array<double, kNumJoints> z;
        for (int j = 0; j < kNumJoints; ++j) z[j] = q[j].z();
        const Pose back = back_project(project_to_2d(q, k2), z, k2);
        for (int j = 0; j < kNumJoints; ++j) CHECK((back[j] - q[j]).norm() <= 1e-9 * q[j].norm());
    }

    std::array<double, kNumJoints> bad{};
    CHECK_THROWS_AS(back_project(kp, bad, K), Error);
    CHECK_THROWS_AS((CameraIntrinsics{0, 1, 0, 0}.validate()), Error);
}

TEST_CASE("pose flattening is joint-major") {
    Rng rng(2);
    const Pose p = random_pose(rng);
    const PoseVector v = p.flat();
    CHECK(v[3 * kHead + 1] == p[kHead].y());
    const Pose back = Pose::from_flat(v);
    for (int j = 0; j < kNumJoints; ++j) CHECK(back[j] == p[j]);
    CHECK_THROWS_AS(Pose::from_flat(Eigen::VectorXd::Zero(41)), Error);
}

TEST_CASE("JSONL records round-trip and synthesize a missing pelvis") {
    Rng rng(4);
    PoseRecord r;
    r.dataset = "a";
    r.subject = "s1";
    r.frame = 12345678901LL;
    r.intrinsics = {1100.5, 1099.25, 512, 500};
    r.pose3d = random_pose(rng);
    r.pose2d = project_to_2d(r.pose3d, r.intrinsics);

    std::stringstream ss;
    write_jsonl(ss, {r, r});
    const auto back = read_jsonl(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].frame == r.frame);
    CHECK(back[0].intrinsics.fy == r.intrinsics.fy);
    for (int j = 0; j < kNumJoints; ++j) {
        CHECK(back[0].pose3d[j] == r.pose3d[j]);
        CHECK((*back[0].pose2d)[j] == (*r.pose2d)[j]);
    }

    nlohmann::json j = record_to_json(r);
    j.erase("joints2d");
    j["joints3d"][0] = nullptr;
    j.erase("pelvis_synthesized");
    const PoseRecord s = record_from_json(j);
    CHECK(s.pelvis_synthesized);
    CHECK(!s.pose2d.has_value());
    CHECK((s.pose3d[kPelvis] - 0.5 * (r.pose3d[kLHip] + r.pose3d[kRHip])).norm() < 1e-12);

    std::stringstream bad("{\"dataset\": \"a\"}\n");
    CHECK_THROWS_AS(read_jsonl(bad), Error);
    std::stringstream short_joints(
        R"({"dataset":"a","subject":"s","frame":0,"intrinsics":{"fx":1,"fy":1,"cx":0,"cy":0},"joints3d":[[0,0,1]]})");
    CHECK_THROWS_AS(read_jsonl(short_joints), Error);
}

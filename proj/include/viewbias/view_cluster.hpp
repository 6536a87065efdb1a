#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "viewbias/body_frame.hpp"

namespace viewbias {

inline constexpr int kDefaultClusterCount = 100;
inline constexpr int kMaxLloydIterations = 300;

/// k-means model over canonicalized viewpoint quaternions.
struct ClusterModel {
    std::vector<Quaternion> centers;
    int k = 0;
    uint64_t seed = 0;
    std::string scope = "global"; // "global" or "local:<dataset>"
    double inertia = 0.0;
    int iterations = 0;
};

struct KMeansTrace {
    // Inertia after every assignment pass, in order.
    std::vector<double> inertia;
};

/// Lloyd's algorithm in R^4 on canonicalized inputs with k-means++ seeding.
/// Centroids are projected back to the unit sphere after each mean step.
/// Throws kTooFewPoints when fewer than k distinct quaternions are given.
ClusterModel fit_kmeans(const std::vector<Quaternion> &quats, int k, uint64_t seed,
                        KMeansTrace *trace = nullptr);

// Nearest center to canonicalize_quaternion(q); ties go to the lowest index.
int assign(const ClusterModel &model, const Quaternion &q);

/// Pools per-dataset quaternions according to `scope` and fits. Datasets are
/// pooled in key order. Throws kEmptyScope when the scope selects nothing.
ClusterModel fit_scoped(const std::map<std::string, std::vector<Quaternion>> &quats_by_dataset, int k,
                        uint64_t seed, const std::string &scope);

nlohmann::json cluster_model_to_json(const ClusterModel &model);
ClusterModel cluster_model_from_json(const nlohmann::json &j);
void write_cluster_model(const std::string &path, const ClusterModel &model);
ClusterModel read_cluster_model(const std::string &path);

} // namespace viewbias

#include "viewbias/view_cluster.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "viewbias/error.hpp"
#include "viewbias/rng.hpp"

namespace viewbias {

namespace {

int nearest_center(const std::vector<Quaternion> &centers, const Quaternion &q, double *dist_sq) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centers.size(); ++c) {
        const double d = (centers[c] - q).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist_sq != nullptr) {
        *dist_sq = best_d;
    }
    return best;
}

size_t count_distinct(std::vector<Quaternion> points) {
    auto less = [](const Quaternion &a, const Quaternion &b) {
        return std::lexicographical_compare(a.data(), a.data() + 4, b.data(), b.data() + 4);
    };
    std::sort(points.begin(), points.end(), less);
    auto last = std::unique(points.begin(), points.end(), [](const Quaternion &a, const Quaternion &b) { return a == b; });
    return static_cast<size_t>(last - points.begin());
}

std::vector<Quaternion> seed_plus_plus(const std::vector<Quaternion> &points, int k, Rng &rng) {
    std::vector<Quaternion> centers;
    centers.reserve(k);
    centers.push_back(points[rng.below(points.size())]);
    std::vector<double> d2(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        d2[i] = (points[i] - centers[0]).squaredNorm();
    }
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double d : d2) {
            total += d;
        }
        // total > 0 is guaranteed while fewer than `distinct` centers exist.
        const double target = rng.uniform() * total;
        double acc = 0.0;
        size_t pick = points.size();
        for (size_t i = 0; i < points.size(); ++i) {
            if (d2[i] <= 0.0) {
                continue;
            }
            acc += d2[i];
            pick = i;
            if (acc > target) {
                break;
            }
        }
        centers.push_back(points[pick]);
        for (size_t i = 0; i < points.size(); ++i) {
            d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
        }
    }
    return centers;
}

} // namespace

ClusterModel fit_kmeans(const std::vector<Quaternion> &quats, int k, uint64_t seed, KMeansTrace *trace) {
    if (k < 1) {
        throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    }
    std::vector<Quaternion> points;
    points.reserve(quats.size());
    for (const auto &q : quats) {
        points.push_back(canonicalize_quaternion(q));
    }
    const size_t distinct = count_distinct(points);
    if (distinct < static_cast<size_t>(k)) {
        throw Error(ErrorCode::kTooFewPoints,
                    std::to_string(distinct) + " distinct quaternions for k = " + std::to_string(k));
    }

    Rng rng(seed);
    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.centers = seed_plus_plus(points, k, rng);

    const size_t n = points.size();
    std::vector<int> labels(n, -1);
    std::vector<double> dist(n, 0.0);
    double inertia = 0.0;
    int iter = 0;
    for (;;) {
        bool changed = false;
        inertia = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const int c = nearest_center(model.centers, points[i], &dist[i]);
            changed |= (c != labels[i]);
            labels[i] = c;
            inertia += dist[i];
        }
        if (trace != nullptr) {
            trace->inertia.push_back(inertia);
        }
        if (!changed || iter >= kMaxLloydIterations) {
            break;
        }
        ++iter;

        std::vector<Quaternion> sums(k, Quaternion::Zero());
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            sums[labels[i]] += points[i];
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0 || sums[c].norm() == 0.0) {
                // Empty cluster: move it to the point worst served by its center.
                size_t worst = 0;
                for (size_t i = 1; i < n; ++i) {
                    if (dist[i] > dist[worst]) {
                        worst = i;
                    }
                }
                model.centers[c] = points[worst];
                dist[worst] = 0.0;
                continue;
            }
            model.centers[c] = canonicalize_quaternion(sums[c]);
        }
    }
    model.inertia = inertia;
    model.iterations = iter;
    return model;
}

int assign(const ClusterModel &model, const Quaternion &q) {
    return nearest_center(model.centers, canonicalize_quaternion(q), nullptr);
}

ClusterModel fit_scoped(const std::map<std::string, std::vector<Quaternion>> &quats_by_dataset, int k,
                        uint64_t seed, const std::string &scope) {
    std::vector<Quaternion> pooled;
    if (scope == "global") {
        for (const auto &[name, quats] : quats_by_dataset) {
            pooled.insert(pooled.end(), quats.begin(), quats.end());
        }
    } else if (scope.rfind("local:", 0) == 0) {
        const auto it = quats_by_dataset.find(scope.substr(6));
        if (it != quats_by_dataset.end()) {
            pooled = it->second;
        }
    } else {
        throw Error(ErrorCode::kInvalidArgument, "scope must be 'global' or 'local:<dataset>', got '" + scope + "'");
    }
    if (pooled.empty()) {
        throw Error(ErrorCode::kEmptyScope, scope);
    }
    ClusterModel model = fit_kmeans(pooled, k, seed);
    model.scope = scope;
    return model;
}

nlohmann::json cluster_model_to_json(const ClusterModel &model) {
    nlohmann::json centers = nlohmann::json::array();
    for (const auto &c : model.centers) {
        centers.push_back({c[0], c[1], c[2], c[3]});
    }
    return {{"k", model.k},
            {"seed", model.seed},
            {"scope", model.scope},
            {"inertia", model.inertia},
            {"centers", std::move(centers)}};
}

ClusterModel cluster_model_from_json(const nlohmann::json &j) {
    try {
        ClusterModel model;
        model.k = j.at("k").get<int>();
        model.seed = j.at("seed").get<uint64_t>();
        model.scope = j.at("scope").get<std::string>();
        model.inertia = j.at("inertia").get<double>();
        for (const auto &c : j.at("centers")) {
            if (!c.is_array() || c.size() != 4) {
                throw Error(ErrorCode::kShapeMismatch, "cluster centers must be [w,x,y,z]");
            }
            // Kept bit-exact; a saved model must behave like the fitted one.
            const Quaternion q(c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>());
            if (std::abs(q.norm() - 1.0) > 1e-9 || (canonicalize_quaternion(q) - q).norm() > 1e-9) {
                throw Error(ErrorCode::kInvalidArgument, "cluster centers must be unit and canonical");
            }
            model.centers.push_back(q);
        }
        if (model.k < 1 || static_cast<int>(model.centers.size()) != model.k) {
            throw Error(ErrorCode::kShapeMismatch, "center count does not match k");
        }
        return model;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, e.what());
    }
}

void write_cluster_model(const std::string &path, const ClusterModel &model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
    }
    out << cluster_model_to_json(model).dump(2) << '\n';
}

ClusterModel read_cluster_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path);
    }
    try {
        return cluster_model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::kParse, path + ": " + e.what());
    }
}

} // namespace viewbias

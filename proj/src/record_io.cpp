#include "viewbias/record_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "viewbias/error.hpp"

namespace viewbias {

using nlohmann::json;

json record_to_json(const PoseRecord &record) {
    json j;
    j["dataset"] = record.dataset;
    j["subject"] = record.subject;
    j["frame"] = record.frame;
    j["intrinsics"] = {{"fx", record.intrinsics.fx},
                       {"fy", record.intrinsics.fy},
                       {"cx", record.intrinsics.cx},
                       {"cy", record.intrinsics.cy}};
    json joints3d = json::array();
    for (const auto &p : record.pose3d.joints) {
        joints3d.push_back({p.x(), p.y(), p.z()});
    }
    j["joints3d"] = std::move(joints3d);
    if (record.pose2d) {
        json joints2d = json::array();
        for (const auto &p : *record.pose2d) {
            joints2d.push_back({p.x(), p.y()});
        }
        j["joints2d"] = std::move(joints2d);
    }
    j["pelvis_synthesized"] = record.pelvis_synthesized;
    return j;
}

PoseRecord record_from_json(const json &j) {
    try {
        PoseRecord record;
        record.dataset = j.at("dataset").get<std::string>();
        const auto &subject = j.at("subject");
        record.subject = subject.is_string() ? subject.get<std::string>() : subject.dump();
        record.frame = j.at("frame").get<int64_t>();
        const auto &k = j.at("intrinsics");
        record.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                             k.at("cy").get<double>()};
        record.intrinsics.validate();

        const auto &joints3d = j.at("joints3d");
        if (!joints3d.is_array() || joints3d.size() != kNumJoints) {
            throw Error(ErrorCode::kShapeMismatch, "joints3d must hold 14 entries");
        }
        bool missing_pelvis = false;
        for (int n = 0; n < kNumJoints; ++n) {
            const auto &p = joints3d[n];
            if (n == kPelvis && p.is_null()) {
                missing_pelvis = true;
                continue;
            }
            if (!p.is_array() || p.size() != 3) {
                throw Error(ErrorCode::kShapeMismatch, "joint entries must be [x,y,z]");
            }
            record.pose3d[n] = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
        }
        record.pelvis_synthesized = j.value("pelvis_synthesized", false);
        if (missing_pelvis) {
            record.pose3d[kPelvis] = synthesized_pelvis(record.pose3d);
            record.pelvis_synthesized = true;
        }
        if (!record.pose3d.is_finite()) {
            throw Error(ErrorCode::kParse, "non-finite joint coordinate");
        }

        if (j.contains("joints2d") && !j["joints2d"].is_null()) {
            const auto &joints2d = j["joints2d"];
            if (!joints2d.is_array() || joints2d.size() != kNumJoints) {
                throw Error(ErrorCode::kShapeMismatch, "joints2d must hold 14 entries");
            }
            Keypoints2d kp;
            for (int n = 0; n < kNumJoints; ++n) {
                const auto &p = joints2d[n];
                if (!p.is_array() || p.size() != 2) {
                    throw Error(ErrorCode::kShapeMismatch, "2d joint entries must be [u,v]");
                }
                kp[n] = {p[0].get<double>(), p[1].get<double>()};
            }
            record.pose2d = kp;
        }
        return record;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::kParse, e.what());
    }
}

void write_jsonl(std::ostream &out, const std::vector<PoseRecord> &records) {
    for (const auto &record : records) {
        out << record_to_json(record).dump() << '\n';
    }
}

std::vector<PoseRecord> read_jsonl(std::istream &in) {
    std::vector<PoseRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception &e) {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error &e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_jsonl_file(const std::string &path, const std::vector<PoseRecord> &records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
    }
    write_jsonl(out, records);
    if (!out) {
        throw Error(ErrorCode::kIo, "failed writing " + path);
    }
}

std::vector<PoseRecord> read_jsonl_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path);
    }
    return read_jsonl(in);
}

} // namespace viewbias

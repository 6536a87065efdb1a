#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "viewbias/skeleton.hpp"

namespace viewbias {

// One JSON object per line:
//   {"dataset", "subject", "frame", "intrinsics": {"fx","fy","cx","cy"},
//    "joints3d": [[x,y,z] x 14], "joints2d": optional [[u,v] x 14],
//    "pelvis_synthesized": bool}
// A null pelvis entry in joints3d is replaced by the hip midpoint and flagged.
nlohmann::json record_to_json(const PoseRecord &record);
PoseRecord record_from_json(const nlohmann::json &j);

void write_jsonl(std::ostream &out, const std::vector<PoseRecord> &records);
std::vector<PoseRecord> read_jsonl(std::istream &in);

void write_jsonl_file(const std::string &path, const std::vector<PoseRecord> &records);
std::vector<PoseRecord> read_jsonl_file(const std::string &path);

} // namespace viewbias

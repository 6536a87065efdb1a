#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace viewbias {

// Lowercase hex SHA-256 of a file's bytes. Throws kIo when unreadable.
std::string sha256_file(const std::string &path);
std::string sha256_string(const std::string &bytes);

struct FileDigest {
    std::string path;
    std::string sha256;
    uint64_t bytes = 0;
};

FileDigest digest_file(const std::string &path);

/// Provenance record written next to every command's outputs.
struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::vector<uint64_t> seeds;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    double wall_time_s = 0.0;

    void add_input(const std::string &path);
    // Hashes the file; throws kIo when it is missing or empty.
    void add_output(const std::string &path);

    nlohmann::json to_json() const;
    void write(const std::string &path) const;
};

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace viewbias

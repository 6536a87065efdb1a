#include "viewbias/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "viewbias/error.hpp"

namespace viewbias {

namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX *ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
  public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error(ErrorCode::kIo, "sha256: digest init failed");
        }
    }
    void update(const void *data, size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        std::string out;
        char buf[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof(buf), "%02x", md[i]);
            out += buf;
        }
        return out;
    }

  private:
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

} // namespace

std::string sha256_string(const std::string &bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::string &path) { return digest_file(path).sha256; }

FileDigest digest_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
    Sha256 h;
    FileDigest d;
    d.path = path;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        const auto n = in.gcount();
        if (n > 0) {
            h.update(buf.data(), static_cast<size_t>(n));
            d.bytes += static_cast<uint64_t>(n);
        }
    }
    d.sha256 = h.hex();
    return d;
}

void RunManifest::add_input(const std::string &path) { inputs.push_back(digest_file(path)); }

void RunManifest::add_output(const std::string &path) {
    FileDigest d = digest_file(path);
    if (d.bytes == 0) throw Error(ErrorCode::kIo, "output is empty: " + path);
    outputs.push_back(std::move(d));
}

nlohmann::json RunManifest::to_json() const {
    auto files = [](const std::vector<FileDigest> &v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto &d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
        return a;
    };
    return {{"command", command}, {"config", config},         {"seeds", seeds},
            {"inputs", files(inputs)}, {"outputs", files(outputs)}, {"wall_time_s", wall_time_s}};
}

void RunManifest::write(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
    out << to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

} // namespace viewbias

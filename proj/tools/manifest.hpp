#pragma once

#include <cstddef>
#include <fstream>
#include <string>

#include <openssl/evp.h>

#include "json.hpp"

#include "calib/error.hpp"
#include "calib/version.hpp"

namespace tool {

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw calib::Error("cannot open file: " + path);

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw calib::Error("digest init failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf), in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

// manifest.json carries everything that determines a run's outputs: command,
// resolved flags, toolkit version, input digests. Deliberately no timestamps,
// so identical runs write identical bytes.
inline void write_manifest(const std::string& out_dir, const std::string& command,
                           const nlohmann::json& parameters, const nlohmann::json& inputs) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["version"] = calib::kVersion;
    manifest["parameters"] = parameters;
    manifest["inputs"] = inputs;

    const std::string path = out_dir + "/manifest.json";
    std::ofstream out(path);
    if (!out) throw calib::Error("cannot open file: " + path);
    out << manifest.dump(2) << "\n";
}

}  // namespace tool

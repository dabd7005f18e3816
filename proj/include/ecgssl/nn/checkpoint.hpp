#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgssl/nn/tensor.hpp"

namespace ecgssl::nn {

/// Checkpoint container: magic, format version, a JSON header (arbitrary
/// metadata plus the tensor directory), then raw little-endian float32 data
/// in directory order. Round-trips bit-exactly.
///
///   bytes 0..3   "ECKP"
///   bytes 4..7   u32 LE format version (1)
///   bytes 8..11  u32 LE header length H
///   bytes 12..   H bytes of JSON, then tensor payloads
struct Checkpoint {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;

    static constexpr std::uint32_t kVersion = 1;

    void add(const std::string& name, const Tensor<float>& t) { tensors.emplace_back(name, t); }

    const Tensor<float>& get(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return t;
        throw DataError("checkpoint: missing tensor " + name);
    }

    void save(const std::filesystem::path& path) const {
        nlohmann::json header = meta;
        nlohmann::json dir = nlohmann::json::array();
        for (const auto& [name, t] : tensors)
            dir.push_back({{"name", name}, {"shape", t.shape}});
        header["tensors"] = dir;
        header["format_version"] = kVersion;
        const std::string hs = header.dump();

        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write checkpoint " + path.string());
        out.write("ECKP", 4);
        write_u32(out, kVersion);
        write_u32(out, static_cast<std::uint32_t>(hs.size()));
        out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
        for (const auto& [name, t] : tensors) {
            static_assert(sizeof(float) == 4);
            out.write(reinterpret_cast<const char*>(t.v.data()),
                      static_cast<std::streamsize>(t.v.size() * 4));
        }
        if (!out) throw DataError("write failure on checkpoint " + path.string());
    }

    static Checkpoint load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw MissingFileError("cannot open checkpoint " + path.string());
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "ECKP", 4) != 0)
            throw DataError("not a checkpoint file: " + path.string());
        const std::uint32_t version = read_u32(in);
        if (version != kVersion)
            throw DataError("unsupported checkpoint version " + std::to_string(version));
        const std::uint32_t hlen = read_u32(in);
        std::string hs(hlen, '\0');
        in.read(hs.data(), hlen);
        if (!in) throw DataError("truncated checkpoint header in " + path.string());

        Checkpoint ck;
        nlohmann::json header = nlohmann::json::parse(hs);
        for (const auto& d : header.at("tensors")) {
            Tensor<float> t(d.at("shape").get<std::vector<int>>());
            in.read(reinterpret_cast<char*>(t.v.data()), static_cast<std::streamsize>(t.v.size() * 4));
            if (!in) throw DataError("truncated tensor data in " + path.string());
            ck.tensors.emplace_back(d.at("name").get<std::string>(), std::move(t));
        }
        header.erase("tensors");
        ck.meta = std::move(header);
        return ck;
    }

private:
    static void write_u32(std::ofstream& out, std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    static std::uint32_t read_u32(std::ifstream& in) {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
};

} // namespace ecgssl::nn

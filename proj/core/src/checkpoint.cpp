#include "asc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "asc/cnn7.hpp"
#include "asc/errors.hpp"
#include "json.hpp"

namespace asc {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'C', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json header;
    header["model_spec"] = nlohmann::json::parse(model_spec_to_json(ckpt.spec));
    header["config_hash"] = ckpt.config_hash;
    header["tensors"] = nlohmann::json::array();
    for (const auto& t : ckpt.tensors)
        header["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out.write(kMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(htext.size()));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& t : ckpt.tensors)
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * 4));
    if (!out) throw IoError("write failed for checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("bad magic in checkpoint " + path);
    std::uint32_t hlen = read_u32(in);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    if (!in) throw IoError("truncated checkpoint header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("checkpoint " + path + ": bad header: " + e.what());
    }

    Checkpoint ckpt;
    ckpt.spec = model_spec_from_json(header.at("model_spec").dump());
    ckpt.config_hash = header.at("config_hash").get<std::string>();
    for (const auto& jt : header.at("tensors")) {
        CheckpointTensor t;
        t.name = jt.at("name").get<std::string>();
        t.shape = jt.at("shape").get<std::vector<std::size_t>>();
        std::size_t n = 1;
        for (std::size_t d : t.shape) n *= d;
        t.data.resize(n);
        in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(n * 4));
        if (!in) throw IoError("truncated tensor data in checkpoint " + path);
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

}  // namespace asc

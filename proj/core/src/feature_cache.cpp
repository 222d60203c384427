#include "asc/feature_cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "asc/errors.hpp"
#include "json.hpp"

namespace asc {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'C', 'F', 'E', 'A', 'T', '1'};

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

void save_feature_cache(const std::string& path, const Spectrogram& spec,
                        const FrontendConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write feature cache " + path);
    out.write(kMagic, 8);
    out.put(static_cast<char>(spec.kind));
    write_u32(out, static_cast<std::uint32_t>(spec.values.rank()));
    for (std::size_t d : spec.values.shape) write_u32(out, static_cast<std::uint32_t>(d));
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(spec.values.data()),
              static_cast<std::streamsize>(spec.values.numel() * 4));
    if (!out) throw IoError("write failed for feature cache " + path);

    std::ofstream side(path + ".json");
    if (!side) throw IoError("cannot write sidecar " + path + ".json");
    side << frontend_config_to_json(cfg);
}

Spectrogram load_feature_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature cache " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("bad magic in feature cache " + path);
    Spectrogram spec;
    spec.kind = static_cast<FrontendKind>(in.get());
    std::uint32_t rank = read_u32(in);
    if (rank != 3) throw IoError("feature cache " + path + ": expected rank 3");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = read_u32(in);
    spec.values = Tensor<float>(shape);
    in.read(reinterpret_cast<char*>(spec.values.data()),
            static_cast<std::streamsize>(spec.values.numel() * 4));
    if (!in) throw IoError("truncated feature cache " + path);
    return spec;
}

bool feature_cache_hit(const std::string& path, const FrontendConfig& cfg) {
    namespace fs = std::filesystem;
    if (!fs::exists(path) || !fs::exists(path + ".json")) return false;
    std::ifstream side(path + ".json");
    std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
    try {
        return frontend_config_equal(frontend_config_from_json(text), cfg);
    } catch (const ValidationError&) {
        return false;
    }
}

std::string frontend_config_to_json(const FrontendConfig& cfg) {
    nlohmann::json j;
    j["kind"] = frontend_kind_name(cfg.kind);
    j["fft_size"] = cfg.fft_size;
    j["window_size"] = cfg.window_size;
    j["hop_size"] = cfg.hop_size;
    j["n_bins"] = cfg.n_bins;
    j["log_floor"] = cfg.log_floor;
    j["delta_width"] = cfg.delta_width;
    j["cqt_bins_per_octave"] = cfg.cqt_bins_per_octave;
    j["cqt_f_min"] = cfg.cqt_f_min;
    j["patch_frames"] = cfg.patch_frames;
    j["patch_overlap"] = cfg.patch_overlap;
    return j.dump(2);
}

FrontendConfig frontend_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("frontend config parse error: ") + e.what());
    }
    FrontendConfig cfg;
    cfg.kind = frontend_kind_from_name(j.at("kind").get<std::string>());
    cfg.fft_size = j.at("fft_size").get<std::size_t>();
    cfg.window_size = j.at("window_size").get<std::size_t>();
    cfg.hop_size = j.at("hop_size").get<std::size_t>();
    cfg.n_bins = j.at("n_bins").get<std::size_t>();
    cfg.log_floor = j.at("log_floor").get<double>();
    cfg.delta_width = j.at("delta_width").get<std::size_t>();
    cfg.cqt_bins_per_octave = j.at("cqt_bins_per_octave").get<std::size_t>();
    cfg.cqt_f_min = j.at("cqt_f_min").get<double>();
    cfg.patch_frames = j.at("patch_frames").get<std::size_t>();
    cfg.patch_overlap = j.at("patch_overlap").get<double>();
    return cfg;
}

bool frontend_config_equal(const FrontendConfig& a, const FrontendConfig& b) {
    return a.kind == b.kind && a.fft_size == b.fft_size && a.window_size == b.window_size &&
           a.hop_size == b.hop_size && a.n_bins == b.n_bins && a.log_floor == b.log_floor &&
           a.delta_width == b.delta_width && a.cqt_bins_per_octave == b.cqt_bins_per_octave &&
           a.cqt_f_min == b.cqt_f_min && a.patch_frames == b.patch_frames &&
           a.patch_overlap == b.patch_overlap;
}

}  // namespace asc

#include "siqa/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace siqa {

namespace {
constexpr char kMagic[8] = {'S', 'I', 'Q', 'A', 'C', 'K', 'P', '1'};
}

nlohmann::json config_to_json(const NetworkConfig& config) {
    return nlohmann::json{{"input_size", config.input_size},
                          {"conv_channels", config.conv_channels},
                          {"head_hidden", config.head_hidden},
                          {"dropout_rate", config.dropout_rate},
                          {"scene_classes", config.scene_classes}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig config;
    config.input_size = j.at("input_size").get<int>();
    config.conv_channels = j.at("conv_channels").get<std::array<int, 6>>();
    config.head_hidden = j.at("head_hidden").get<std::array<int, 2>>();
    config.dropout_rate = j.at("dropout_rate").get<double>();
    config.scene_classes = j.at("scene_classes").get<int>();
    config.validate();
    return config;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkWeights& weights,
                     const nlohmann::json& meta) {
    nlohmann::json header;
    header["config"] = config_to_json(weights.config);
    header["dtype"] = "float32";
    header["meta"] = meta;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : weights.layout)
        tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"count", t.count}});
    header["tensors"] = tensors;

    const std::string header_str = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    unsigned char len_bytes[4] = {static_cast<unsigned char>(len & 0xff),
                                  static_cast<unsigned char>((len >> 8) & 0xff),
                                  static_cast<unsigned char>((len >> 16) & 0xff),
                                  static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_bytes), 4);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    std::vector<float> buf(weights.params.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(weights.params[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError(path.string() + " is not a checkpoint file");

    unsigned char len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    if (!in) throw IoError("truncated checkpoint header in " + path.string());
    const std::uint32_t len = static_cast<std::uint32_t>(len_bytes[0]) |
                              (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                              (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                              (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("truncated checkpoint header in " + path.string());

    nlohmann::json header = nlohmann::json::parse(header_str);
    if (header.at("dtype").get<std::string>() != "float32")
        throw IoError("unsupported checkpoint dtype in " + path.string());

    Checkpoint ckpt;
    ckpt.weights.config = config_from_json(header.at("config"));
    ckpt.weights.layout = make_layout(ckpt.weights.config);
    ckpt.meta = header.at("meta");

    const auto& tensors = header.at("tensors");
    if (tensors.size() != ckpt.weights.layout.size())
        throw IoError("checkpoint tensor table does not match its config");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& t = ckpt.weights.layout[i];
        if (tensors[i].at("name").get<std::string>() != t.name ||
            tensors[i].at("count").get<std::size_t>() != t.count ||
            tensors[i].at("shape").get<std::vector<int>>() != t.shape)
            throw IoError("checkpoint tensor " + t.name + " does not match its config");
    }

    const std::size_t total = parameter_count(ckpt.weights.config);
    std::vector<float> buf(total);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(total * sizeof(float)));
    if (!in) throw IoError("truncated checkpoint payload in " + path.string());

    ckpt.weights.params.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        ckpt.weights.params[i] = static_cast<double>(buf[i]);
    return ckpt;
}

}  // namespace siqa

#pragma once

#include <filesystem>

#include <json.hpp>

#include "siqa/network.hpp"

namespace siqa {

/// Checkpoint file layout:
///   bytes 0..7   magic "SIQACKP1"
///   bytes 8..11  header length, unsigned 32-bit little-endian
///   header       UTF-8 JSON: config, caller metadata, tensor table
///   payload      raw little-endian 32-bit floats, tensors in table order
/// Loading then saving reproduces the file byte for byte.
struct Checkpoint {
    NetworkWeights weights;
    nlohmann::json meta;
};

nlohmann::json config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const NetworkWeights& weights,
                     const nlohmann::json& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace siqa

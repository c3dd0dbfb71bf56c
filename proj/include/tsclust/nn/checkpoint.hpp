#pragma once

#include <filesystem>

#include <json.hpp>

#include "tsclust/nn/network.hpp"

namespace tsclust::nn {

// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "TSNNCKPT"
//   u32       format version (1)
//   u64       header length H
//   H bytes   UTF-8 JSON header: input shape, layer specs, tensor table, metadata
//   doubles   IEEE-754 binary64, little-endian, in tensor-table order
// Every tensor is stored row-major exactly as held in LayerParams, so a
// save/load round trip is bitwise.

nlohmann::json to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);

void save_network(const std::filesystem::path& path, const Network& net, const nlohmann::json& metadata = {});

struct LoadedNetwork {
    Network network;
    nlohmann::json metadata;
};

LoadedNetwork load_network(const std::filesystem::path& path);

}  // namespace tsclust::nn

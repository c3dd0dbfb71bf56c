#include "tsclust/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tsclust/error.hpp"

namespace tsclust::nn {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class U>
void write_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <class U>
U read_le(std::istream& in, const std::string& source) {
    std::array<unsigned char, sizeof(U)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw IoError(source + ": truncated checkpoint");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

struct TensorSlot {
    const char* name;
    std::vector<double> LayerParams::*member;
};

constexpr std::array<TensorSlot, 6> kSlots = {{
    {"weight", &LayerParams::weight},
    {"bias", &LayerParams::bias},
    {"gamma", &LayerParams::gamma},
    {"beta", &LayerParams::beta},
    {"running_mean", &LayerParams::running_mean},
    {"running_var", &LayerParams::running_var},
}};

}  // namespace

nlohmann::json to_json(const LayerSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind));
    switch (spec.kind) {
        case LayerKind::dense:
            j["units"] = spec.units;
            break;
        case LayerKind::conv1d:
            j["filters"] = spec.filters;
            j["kernel"] = spec.kernel;
            j["stride"] = spec.stride;
            break;
        case LayerKind::deconv1d:
            j["filters"] = spec.filters;
            j["kernel"] = spec.kernel;
            j["upsample"] = spec.upsample;
            break;
        case LayerKind::reshape:
            j["channels"] = spec.target.channels;
            j["length"] = spec.target.length;
            break;
        case LayerKind::batchnorm:
        case LayerKind::flatten:
            break;
    }
    j["activation"] = std::string(to_string(spec.activation));
    return j;
}

LayerSpec layer_spec_from_json(const nlohmann::json& j) {
    LayerSpec s;
    s.kind = parse_layer_kind(j.at("kind").get<std::string>());
    s.activation = parse_activation(j.value("activation", std::string("linear")));
    s.units = j.value("units", std::size_t{0});
    s.filters = j.value("filters", std::size_t{0});
    s.kernel = j.value("kernel", std::size_t{1});
    s.stride = j.value("stride", std::size_t{1});
    s.upsample = j.value("upsample", std::size_t{1});
    s.target = {j.value("channels", std::size_t{0}), j.value("length", std::size_t{0})};
    return s;
}

void save_network(const std::filesystem::path& path, const Network& net, const nlohmann::json& metadata) {
    nlohmann::json header;
    header["input"] = {{"channels", net.input_shape().channels}, {"length", net.input_shape().length}};
    header["layers"] = nlohmann::json::array();
    for (const auto& spec : net.layers()) header["layers"].push_back(to_json(spec));
    header["tensors"] = nlohmann::json::array();
    header["eps"] = nlohmann::json::array();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& p = net.params()[i];
        header["eps"].push_back(p.eps);
        for (const auto& slot : kSlots) {
            const auto& v = p.*slot.member;
            if (!v.empty()) header["tensors"].push_back({{"layer", i}, {"name", slot.name}, {"count", v.size()}});
        }
    }
    header["metadata"] = metadata.is_null() ? nlohmann::json::object() : metadata;
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : net.params())
        for (const auto& slot : kSlots)
            for (double v : p.*slot.member) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw IoError("write failed: " + path.string());
}

LoadedNetwork load_network(const std::filesystem::path& path) {
    const std::string source = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + source);
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw IoError(source + ": not a network checkpoint");
    const auto version = read_le<std::uint32_t>(in, source);
    if (version != kVersion) throw IoError(source + ": unsupported checkpoint version " + std::to_string(version));
    const auto header_len = read_le<std::uint64_t>(in, source);
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw IoError(source + ": truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(source + ": bad checkpoint header: " + e.what());
    }

    std::vector<LayerSpec> layers;
    for (const auto& j : header.at("layers")) layers.push_back(layer_spec_from_json(j));
    FeatureShape input{header.at("input").at("channels").get<std::size_t>(),
                       header.at("input").at("length").get<std::size_t>()};
    LoadedNetwork result{Network(input, std::move(layers)), header.value("metadata", nlohmann::json::object())};
    auto& params = result.network.params();
    const auto& eps = header.at("eps");
    for (std::size_t i = 0; i < params.size(); ++i) params[i].eps = eps.at(i).get<double>();

    for (const auto& t : header.at("tensors")) {
        const auto layer = t.at("layer").get<std::size_t>();
        const auto name = t.at("name").get<std::string>();
        const auto count = t.at("count").get<std::size_t>();
        if (layer >= params.size()) throw IoError(source + ": tensor for missing layer " + std::to_string(layer));
        std::vector<double>* target = nullptr;
        for (const auto& slot : kSlots)
            if (name == slot.name) target = &(params[layer].*slot.member);
        if (!target) throw IoError(source + ": unknown tensor '" + name + "'");
        if (target->size() != count) {
            throw IoError(source + ": tensor " + name + " of layer " + std::to_string(layer) + " has " +
                          std::to_string(count) + " values, architecture expects " + std::to_string(target->size()));
        }
        for (auto& v : *target) v = std::bit_cast<double>(read_le<std::uint64_t>(in, source));
    }
    return result;
}

}  // namespace tsclust::nn

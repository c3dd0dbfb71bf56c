#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>

namespace tsclust {

using Sha256 = std::array<unsigned char, 32>;

Sha256 sha256(std::span<const unsigned char> bytes);
Sha256 sha256_of_doubles(std::span<const double> values);
std::string sha256_file_hex(const std::filesystem::path& path);
std::string to_hex(const Sha256& digest);

}  // namespace tsclust

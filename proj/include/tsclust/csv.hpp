#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Whole-field parse; throws std::invalid_argument on junk.
double parse_double(std::string_view field);
std::size_t parse_index(std::string_view field);

/// Splits on commas and trims surrounding whitespace. No quoting support;
/// identifiers must not contain commas.
std::vector<std::string_view> split(std::string_view line);

/// Reads all lines, dropping a trailing '\r' on each.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);

/// `id,f_0,...,f_{d-1}` rows.
void write_matrix(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& ids,
                  const std::string& column_prefix = "f_");
Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);

}  // namespace tsclust::csv

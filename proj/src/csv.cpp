#include "tsclust/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tsclust/error.hpp"

namespace tsclust::csv {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && field.front() == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || field.empty())
        throw std::invalid_argument("not a number: '" + std::string(field) + "'");
    return v;
}

std::size_t parse_index(std::string_view field) {
    std::size_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty())
        throw std::invalid_argument("not a nonnegative integer: '" + std::string(field) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
    return lines;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& ids,
                  const std::string& column_prefix) {
    if (ids.size() != m.rows()) throw DimensionError("write_matrix: id count differs from row count");
    std::ostringstream os;
    os << "series_id";
    for (std::size_t j = 0; j < m.cols(); ++j) os << ',' << column_prefix << j;
    os << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << ids[i];
        for (double v : m.row(i)) os << ',' << format_double(v);
        os << '\n';
    }
    write_text(path, os.str());
}

Matrix read_matrix(const std::filesystem::path& path, std::vector<std::string>* ids) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path.string(), 1, "missing header");
    const std::size_t cols = split(lines[0]).size() - 1;
    std::vector<double> values;
    std::size_t rows = 0;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto fields = split(lines[ln]);
        if (fields.size() != cols + 1)
            throw ParseError(path.string(), ln + 1,
                             "expected " + std::to_string(cols + 1) + " fields, got " + std::to_string(fields.size()));
        if (ids) ids->emplace_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            try {
                values.push_back(parse_double(fields[j]));
            } catch (const std::invalid_argument& e) {
                throw ParseError(path.string(), ln + 1, e.what());
            }
        }
        ++rows;
    }
    return Matrix(rows, cols, std::move(values));
}

}  // namespace tsclust::csv

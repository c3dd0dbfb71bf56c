#include "tsclust/hash.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "tsclust/error.hpp"

namespace tsclust {

namespace {

struct DigestContext {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    DigestContext() {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
    }
    ~DigestContext() { EVP_MD_CTX_free(ctx); }
    DigestContext(const DigestContext&) = delete;
    DigestContext& operator=(const DigestContext&) = delete;

    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }
    Sha256 finish() {
        Sha256 out{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx, out.data(), &len);
        return out;
    }
};

}  // namespace

Sha256 sha256(std::span<const unsigned char> bytes) {
    DigestContext d;
    d.update(bytes.data(), bytes.size());
    return d.finish();
}

Sha256 sha256_of_doubles(std::span<const double> values) {
    DigestContext d;
    std::vector<unsigned char> buf;
    buf.reserve(8 * 4096);
    auto flush = [&] {
        d.update(buf.data(), buf.size());
        buf.clear();
    };
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
        if (buf.size() >= 8 * 4096) flush();
    }
    flush();
    return d.finish();
}

std::string sha256_file_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    DigestContext d;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return to_hex(d.finish());
}

std::string to_hex(const Sha256& digest) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (unsigned char c : digest) {
        s.push_back(kHex[c >> 4]);
        s.push_back(kHex[c & 0xF]);
    }
    return s;
}

}  // namespace tsclust

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnoise/detail/format.hpp"
#include "pnoise/timegen.hpp"

// Stream dumps.
//
// CSV:    header `k,theta_rad`, one row per sample.
// Binary: "PNSTREAM" | u32 version (1) | u32 header length | JSON header |
//         u64 sample count | float64 samples. All integers and floats are
//         little-endian. The JSON header carries ts, seed, n and the model.

namespace pnoise::io {

inline constexpr char stream_magic[8] = {'P', 'N', 'S', 'T', 'R', 'E', 'A', 'M'};
inline constexpr std::uint32_t stream_version = 1;

inline void write_stream_csv(std::ostream& out, const PnStream& s) {
    out << "k,theta_rad\n";
    for (std::size_t k = 0; k < s.samples.size(); ++k) {
        out << k << ',' << detail::fmt(s.samples[k]) << '\n';
    }
}

inline std::string stream_header_json(const PnStream& s) {
    return "{\"ts\":" + detail::fmt(s.ts) + ",\"seed\":" + std::to_string(s.seed) +
           ",\"n\":" + std::to_string(s.samples.size()) + ",\"model\":" + s.model.json() + "}";
}

namespace detail {

template <class U>
void put_le(std::ostream& out, U v) {
    std::array<char, sizeof(U)> b{};
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b.data(), b.size());
}

template <class U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in) throw std::runtime_error("stream dump: truncated file");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void write_stream_binary(std::ostream& out, const PnStream& s) {
    const std::string h = stream_header_json(s);
    out.write(stream_magic, sizeof stream_magic);
    detail::put_le<std::uint32_t>(out, stream_version);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    detail::put_le<std::uint64_t>(out, s.samples.size());
    for (double v : s.samples) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        detail::put_le<std::uint64_t>(out, bits);
    }
}

struct BinaryStream {
    std::string header_json;
    std::vector<double> samples;
};

inline BinaryStream read_stream_binary(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, stream_magic, sizeof magic) != 0) {
        throw std::runtime_error("stream dump: bad magic");
    }
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != stream_version) throw std::runtime_error("stream dump: unsupported version " + std::to_string(version));
    const auto hlen = detail::get_le<std::uint32_t>(in);
    BinaryStream b;
    b.header_json.resize(hlen);
    in.read(b.header_json.data(), hlen);
    const auto n = detail::get_le<std::uint64_t>(in);
    b.samples.resize(n);
    for (auto& v : b.samples) {
        const auto bits = detail::get_le<std::uint64_t>(in);
        std::memcpy(&v, &bits, sizeof v);
    }
    return b;
}

}  // namespace pnoise::io

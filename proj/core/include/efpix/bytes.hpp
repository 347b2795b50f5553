#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace efpix {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

using Hash64 = std::array<std::uint8_t, 64>;
using Nonce3 = std::array<std::uint8_t, 3>;
using Blob256 = std::array<std::uint8_t, 256>;
using Sig256 = std::array<std::uint8_t, 256>;
using Seed32 = std::array<std::uint8_t, 32>;

// Microseconds since the Unix epoch / microsecond spans.
using Timestamp = std::uint64_t;
using Duration = std::uint64_t;

inline ByteSpan as_span(const Bytes& b) { return ByteSpan(b.data(), b.size()); }

template <std::size_t N>
ByteSpan as_span(const std::array<std::uint8_t, N>& a) {
    return ByteSpan(a.data(), N);
}

inline ByteSpan str_span(std::string_view s) {
    return ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

template <std::size_t N>
std::array<std::uint8_t, N> take_array(ByteSpan b, std::size_t offset = 0) {
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = b[offset + i];
    return out;
}

void append(Bytes& out, ByteSpan data);

// Big-endian fixed-width integer encoding.
void put_be(Bytes& out, std::uint64_t value, std::size_t width);
std::uint64_t get_be(ByteSpan b, std::size_t offset, std::size_t width);

std::string to_hex(ByteSpan data);
Bytes from_hex(std::string_view hex);  // throws Error{malformed_input}

std::string base64_encode(ByteSpan data);
Bytes base64_decode(std::string_view text);  // throws Error{malformed_input}

bool constant_time_equal(ByteSpan a, ByteSpan b);

// Content of a Hash64 is already a digest; the first bytes serve as the
// bucket key directly.
struct Hash64Key {
    std::size_t operator()(const Hash64& h) const {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | h[static_cast<std::size_t>(i)];
        return static_cast<std::size_t>(v);
    }
};

}  // namespace efpix

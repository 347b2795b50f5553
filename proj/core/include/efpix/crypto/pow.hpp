#pragma once

#include <cstdint>

#include "efpix/bytes.hpp"

namespace efpix {

// Nonce space is 3 bytes; difficulties close to 24 bits would exhaust it, so
// the ceiling keeps expected mining attempts well inside the space.
inline constexpr std::uint32_t kMaxDifficultyBits = 20;
inline constexpr std::size_t kNonceWidth = 3;
inline constexpr std::uint32_t kNonceSpace = 1u << 24;

struct PowParams {
    std::uint32_t difficulty_bits = 16;

    void validate() const;
};

std::uint32_t nonce_value(const Nonce3& nonce);
Nonce3 nonce_from_value(std::uint32_t value);

int leading_zero_bits(ByteSpan data);

// The dedup hash stays nonce-free; the work function binds the nonce to it
// through a second digest.
Hash64 pow_digest(const Hash64& message_hash, const Nonce3& nonce);

bool pow_check(const Hash64& message_hash, const Nonce3& nonce, const PowParams& params);

// Ascending search from zero; the returned nonce is the smallest passing one.
// Throws Error{nonce_exhausted} if the 2^24 space is spent.
Nonce3 mine_nonce(const Hash64& message_hash, const PowParams& params);

}  // namespace efpix

#include "efpix/crypto/pow.hpp"

#include "efpix/crypto/sha512.hpp"
#include "efpix/error.hpp"

namespace efpix {

void PowParams::validate() const {
    if (difficulty_bits > kMaxDifficultyBits) {
        raise(Errc::bad_difficulty,
              "difficulty_bits " + std::to_string(difficulty_bits) + " exceeds " +
                  std::to_string(kMaxDifficultyBits));
    }
}

std::uint32_t nonce_value(const Nonce3& nonce) {
    return (static_cast<std::uint32_t>(nonce[0]) << 16) |
           (static_cast<std::uint32_t>(nonce[1]) << 8) | nonce[2];
}

Nonce3 nonce_from_value(std::uint32_t value) {
    return {static_cast<std::uint8_t>((value >> 16) & 0xff),
            static_cast<std::uint8_t>((value >> 8) & 0xff),
            static_cast<std::uint8_t>(value & 0xff)};
}

int leading_zero_bits(ByteSpan data) {
    int bits = 0;
    for (std::uint8_t b : data) {
        if (b == 0) {
            bits += 8;
            continue;
        }
        for (int i = 7; i >= 0; --i) {
            if ((b >> i) & 1) return bits;
            ++bits;
        }
    }
    return bits;
}

Hash64 pow_digest(const Hash64& message_hash, const Nonce3& nonce) {
    return sha512({as_span(message_hash), as_span(nonce)});
}

bool pow_check(const Hash64& message_hash, const Nonce3& nonce, const PowParams& params) {
    if (params.difficulty_bits == 0) return true;
    Hash64 digest = pow_digest(message_hash, nonce);
    return leading_zero_bits(digest) >= static_cast<int>(params.difficulty_bits);
}

Nonce3 mine_nonce(const Hash64& message_hash, const PowParams& params) {
    params.validate();
    for (std::uint32_t candidate = 0; candidate < kNonceSpace; ++candidate) {
        Nonce3 nonce = nonce_from_value(candidate);
        if (pow_check(message_hash, nonce, params)) return nonce;
    }
    raise(Errc::nonce_exhausted, "no nonce satisfies the difficulty");
}

}  // namespace efpix

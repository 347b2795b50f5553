#pragma once

#include <cstdint>
#include <string>

#include "efpix/bytes.hpp"

namespace efpix {

// Pre-encryption layout: timestamp(9, big-endian microseconds) ||
// alias(16, UTF-8, zero padded) || internal address(4, big-endian) || message.
inline constexpr std::size_t kTimestampSize = 9;
inline constexpr std::size_t kAliasSize = 16;
inline constexpr std::size_t kAddressSize = 4;
inline constexpr std::size_t kPayloadHeaderSize = kTimestampSize + kAliasSize + kAddressSize;
inline constexpr std::size_t kMaxMessageSize = 216;
inline constexpr std::size_t kMaxPayloadSize = kPayloadHeaderSize + kMaxMessageSize;

// Wire layout: version(1) || hash(64) || nonce(3) || blob(256) || signature(256).
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kWireSize = 580;
inline constexpr std::size_t kHashOffset = 1;
inline constexpr std::size_t kNonceOffset = 65;
inline constexpr std::size_t kBlobOffset = 68;
inline constexpr std::size_t kSignatureOffset = 324;

struct PlainPayload {
    Timestamp created_at = 0;
    std::string sender_alias;
    std::uint32_t internal_address = 0;
    Bytes message;

    bool operator==(const PlainPayload&) const = default;
};

struct EncodedMessage {
    std::uint8_t version = kWireVersion;
    Hash64 hash{};
    Nonce3 nonce{};
    Blob256 encrypted_blob{};
    Sig256 signature{};

    bool operator==(const EncodedMessage&) const = default;
};

// 1..16 bytes of valid UTF-8 with no embedded NUL.
bool valid_alias(std::string_view alias);

Bytes serialize_payload(const PlainPayload& payload);
PlainPayload parse_payload(ByteSpan data);

Bytes serialize_message(const EncodedMessage& message);
EncodedMessage parse_message(ByteSpan data);

}  // namespace efpix

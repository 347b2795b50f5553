#include "efpix/codec.hpp"

#include <tuple>

#include "efpix/error.hpp"

namespace efpix {

namespace {

constexpr std::size_t kHashLen = std::tuple_size_v<Hash64>;
constexpr std::size_t kNonceLen = std::tuple_size_v<Nonce3>;
constexpr std::size_t kBlobLen = std::tuple_size_v<Blob256>;
constexpr std::size_t kSigLen = std::tuple_size_v<Sig256>;

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        std::uint8_t c = static_cast<std::uint8_t>(s[i]);
        std::size_t extra;
        std::uint32_t cp;
        if (c < 0x80) {
            extra = 0;
            cp = c;
        } else if ((c & 0xe0) == 0xc0) {
            extra = 1;
            cp = c & 0x1f;
        } else if ((c & 0xf0) == 0xe0) {
            extra = 2;
            cp = c & 0x0f;
        } else if ((c & 0xf8) == 0xf0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (extra != 0 && i + extra >= s.size()) return false;
        for (std::size_t j = 1; j <= extra; ++j) {
            std::uint8_t cc = static_cast<std::uint8_t>(s[i + j]);
            if ((cc & 0xc0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3f);
        }
        // overlong forms, surrogates, out of range
        if (extra == 1 && cp < 0x80) return false;
        if (extra == 2 && cp < 0x800) return false;
        if (extra == 3 && cp < 0x10000) return false;
        if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
        i += extra + 1;
    }
    return true;
}

}  // namespace

bool valid_alias(std::string_view alias) {
    if (alias.empty() || alias.size() > kAliasSize) return false;
    if (alias.find('\0') != std::string_view::npos) return false;
    return valid_utf8(alias);
}

Bytes serialize_payload(const PlainPayload& payload) {
    if (payload.sender_alias.size() > kAliasSize) {
        raise(Errc::alias_too_long, "alias is " + std::to_string(payload.sender_alias.size()) +
                                        " bytes, limit " + std::to_string(kAliasSize));
    }
    if (!valid_alias(payload.sender_alias)) {
        raise(Errc::invalid_alias, "alias must be 1..16 bytes of NUL-free UTF-8");
    }
    if (payload.message.size() > kMaxMessageSize) {
        raise(Errc::message_too_long, "message is " + std::to_string(payload.message.size()) +
                                          " bytes, limit " + std::to_string(kMaxMessageSize));
    }
    Bytes out;
    out.reserve(kPayloadHeaderSize + payload.message.size());
    put_be(out, payload.created_at, kTimestampSize);
    append(out, str_span(payload.sender_alias));
    for (std::size_t i = payload.sender_alias.size(); i < kAliasSize; ++i) out.push_back(0);
    put_be(out, payload.internal_address, kAddressSize);
    append(out, as_span(payload.message));
    return out;
}

PlainPayload parse_payload(ByteSpan data) {
    if (data.size() < kPayloadHeaderSize || data.size() > kMaxPayloadSize) {
        raise(Errc::malformed_payload,
              "payload must be 29..245 bytes, got " + std::to_string(data.size()));
    }
    // A 72-bit timestamp with the top byte set is beyond any representable
    // time; treat it as corruption.
    if (data[0] != 0) raise(Errc::malformed_payload, "timestamp out of range");

    PlainPayload payload;
    payload.created_at = get_be(data, 1, kTimestampSize - 1);

    std::size_t alias_len = kAliasSize;
    while (alias_len > 0 && data[kTimestampSize + alias_len - 1] == 0) --alias_len;
    payload.sender_alias.assign(reinterpret_cast<const char*>(data.data()) + kTimestampSize,
                                alias_len);
    if (!valid_alias(payload.sender_alias)) {
        raise(Errc::malformed_payload, "alias field is not NUL-free UTF-8");
    }

    payload.internal_address =
        static_cast<std::uint32_t>(get_be(data, kTimestampSize + kAliasSize, kAddressSize));
    payload.message.assign(data.begin() + kPayloadHeaderSize, data.end());
    return payload;
}

Bytes serialize_message(const EncodedMessage& message) {
    Bytes out;
    out.reserve(kWireSize);
    out.push_back(message.version);
    append(out, as_span(message.hash));
    append(out, as_span(message.nonce));
    append(out, as_span(message.encrypted_blob));
    append(out, as_span(message.signature));
    return out;
}

EncodedMessage parse_message(ByteSpan data) {
    if (data.size() != kWireSize) {
        raise(Errc::malformed_message,
              "wire message must be " + std::to_string(kWireSize) + " bytes, got " +
                  std::to_string(data.size()));
    }
    if (data[0] != kWireVersion) {
        raise(Errc::unsupported_version, "version byte " + std::to_string(data[0]));
    }
    EncodedMessage message;
    message.version = data[0];
    message.hash = take_array<kHashLen>(data, kHashOffset);
    message.nonce = take_array<kNonceLen>(data, kNonceOffset);
    message.encrypted_blob = take_array<kBlobLen>(data, kBlobOffset);
    message.signature = take_array<kSigLen>(data, kSignatureOffset);
    return message;
}

}  // namespace efpix

#pragma once

#include <optional>
#include <string_view>

#include "efpix/bytes.hpp"

namespace efpix {

enum class CipherSuiteId {
    reference_rsa2048_sha512,
    mock_fixed_size,
};

std::string_view suite_name(CipherSuiteId id);
CipherSuiteId suite_from_name(std::string_view name);  // throws Error{config_error}

inline constexpr std::size_t kBlobSize = 256;
inline constexpr std::size_t kSignatureSize = 256;
inline constexpr std::size_t kHashSize = 64;
// 29 fixed payload header bytes up to the 245-byte RSA-2048/PKCS#1 v1.5 ceiling.
inline constexpr std::size_t kMinPlaintext = 29;
inline constexpr std::size_t kMaxPlaintext = 245;

struct KeyPair {
    Bytes public_key;
    Bytes private_key;
    CipherSuiteId suite = CipherSuiteId::reference_rsa2048_sha512;
};

// Public-key encryption and signing behind fixed wire sizes. Every operation
// is a pure function of its arguments; implementations hold no mutable state,
// so a suite instance may be shared across threads freely.
class CipherSuite {
public:
    virtual ~CipherSuite() = default;

    virtual CipherSuiteId id() const = 0;

    // The mock suite demands a seed; the reference suite uses system entropy
    // and, when a seed is given, stirs it into the entropy pool.
    virtual KeyPair generate_keypair(const std::optional<Seed32>& seed = std::nullopt) const = 0;

    Blob256 encrypt(ByteSpan public_key, ByteSpan plaintext) const;

    // A wrong or mismatched key yields nullopt, never garbage. This is the
    // normal outcome on every relay node that is not the addressee.
    std::optional<Bytes> decrypt(ByteSpan private_key, ByteSpan blob) const;

    Sig256 sign(ByteSpan private_key, ByteSpan data) const;

    // Total: malformed keys or signatures return false rather than throwing.
    bool verify(ByteSpan public_key, ByteSpan data, ByteSpan signature) const;

private:
    virtual Blob256 do_encrypt(ByteSpan public_key, ByteSpan plaintext) const = 0;
    virtual std::optional<Bytes> do_decrypt(ByteSpan private_key, const Blob256& blob) const = 0;
    virtual Sig256 do_sign(ByteSpan private_key, ByteSpan data) const = 0;
    virtual bool do_verify(ByteSpan public_key, ByteSpan data, const Sig256& signature) const = 0;
};

const CipherSuite& suite(CipherSuiteId id);

// Dedup identity of a message: SHA-512 over encrypted blob || signature.
// The nonce is deliberately outside of it.
Hash64 hash_message(const Blob256& encrypted_blob, const Sig256& signature);

}  // namespace efpix

#include "efpix/crypto/suite.hpp"

#include "efpix/crypto/sha512.hpp"
#include "efpix/error.hpp"

namespace efpix {

const CipherSuite& reference_suite();
const CipherSuite& mock_suite();

std::string_view suite_name(CipherSuiteId id) {
    switch (id) {
        case CipherSuiteId::reference_rsa2048_sha512: return "reference_rsa2048_sha512";
        case CipherSuiteId::mock_fixed_size: return "mock_fixed_size";
    }
    return "unknown";
}

CipherSuiteId suite_from_name(std::string_view name) {
    if (name == "reference_rsa2048_sha512" || name == "reference") {
        return CipherSuiteId::reference_rsa2048_sha512;
    }
    if (name == "mock_fixed_size" || name == "mock") return CipherSuiteId::mock_fixed_size;
    raise(Errc::config_error, "unknown cipher suite '" + std::string(name) + "'");
}

const CipherSuite& suite(CipherSuiteId id) {
    switch (id) {
        case CipherSuiteId::reference_rsa2048_sha512: return reference_suite();
        case CipherSuiteId::mock_fixed_size: return mock_suite();
    }
    raise(Errc::config_error, "unknown cipher suite id");
}

Blob256 CipherSuite::encrypt(ByteSpan public_key, ByteSpan plaintext) const {
    if (plaintext.size() > kMaxPlaintext) {
        raise(Errc::plaintext_too_long,
              std::to_string(plaintext.size()) + " bytes, limit " + std::to_string(kMaxPlaintext));
    }
    if (plaintext.size() < kMinPlaintext) {
        raise(Errc::plaintext_too_short,
              std::to_string(plaintext.size()) + " bytes, minimum " + std::to_string(kMinPlaintext));
    }
    return do_encrypt(public_key, plaintext);
}

std::optional<Bytes> CipherSuite::decrypt(ByteSpan private_key, ByteSpan blob) const {
    if (blob.size() != kBlobSize) {
        raise(Errc::bad_length, "encrypted blob must be " + std::to_string(kBlobSize) +
                                    " bytes, got " + std::to_string(blob.size()));
    }
    return do_decrypt(private_key, take_array<kBlobSize>(blob));
}

Sig256 CipherSuite::sign(ByteSpan private_key, ByteSpan data) const {
    if (data.empty()) raise(Errc::precondition, "cannot sign empty data");
    return do_sign(private_key, data);
}

bool CipherSuite::verify(ByteSpan public_key, ByteSpan data, ByteSpan signature) const {
    if (signature.size() != kSignatureSize) return false;
    return do_verify(public_key, data, take_array<kSignatureSize>(signature));
}

Hash64 hash_message(const Blob256& encrypted_blob, const Sig256& signature) {
    return sha512({as_span(encrypted_blob), as_span(signature)});
}

}  // namespace efpix

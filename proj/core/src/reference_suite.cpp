#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <memory>

#include "efpix/crypto/suite.hpp"
#include "efpix/error.hpp"

namespace efpix {

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct CtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using CtxPtr = std::unique_ptr<EVP_PKEY_CTX, CtxDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

PkeyPtr parse_public(ByteSpan der) {
    const unsigned char* p = der.data();
    EVP_PKEY* key = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
    if (key == nullptr) raise(Errc::invalid_key, "cannot parse public key DER");
    return PkeyPtr(key);
}

PkeyPtr parse_private(ByteSpan der) {
    const unsigned char* p = der.data();
    EVP_PKEY* key = d2i_AutoPrivateKey(nullptr, &p, static_cast<long>(der.size()));
    if (key == nullptr) raise(Errc::invalid_key, "cannot parse private key DER");
    return PkeyPtr(key);
}

void check_rsa2048(EVP_PKEY* key) {
    if (EVP_PKEY_get_base_id(key) != EVP_PKEY_RSA || EVP_PKEY_get_size(key) != kBlobSize) {
        raise(Errc::invalid_key, "expected an RSA key with a 256-byte modulus");
    }
}

// Strict PKCS#1 v1.5 block type 2 unpadding over the raw RSA output.
// OpenSSL's own unpadding is bypassed: builds with implicit rejection return
// pseudorandom plaintext on a padding failure instead of an error, and the
// protocol needs a hard DecryptFailure signal. The stray-acceptance chance of
// random input drops further by requiring the recovered length to sit inside
// the 29..245 payload window.
std::optional<Bytes> unpad_pkcs1(const Blob256& raw) {
    if (raw[0] != 0x00 || raw[1] != 0x02) return std::nullopt;
    std::size_t sep = 0;
    for (std::size_t i = 2; i < raw.size(); ++i) {
        if (raw[i] == 0x00) {
            sep = i;
            break;
        }
    }
    if (sep < 10) return std::nullopt;  // at least 8 nonzero padding bytes
    std::size_t len = raw.size() - sep - 1;
    if (len < kMinPlaintext || len > kMaxPlaintext) return std::nullopt;
    return Bytes(raw.begin() + static_cast<long>(sep) + 1, raw.end());
}

class ReferenceSuite final : public CipherSuite {
public:
    CipherSuiteId id() const override { return CipherSuiteId::reference_rsa2048_sha512; }

    KeyPair generate_keypair(const std::optional<Seed32>& seed) const override {
        if (seed.has_value()) {
            RAND_add(seed->data(), static_cast<int>(seed->size()), 0.0);
        }
        CtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
        if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 ||
            EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), 2048) <= 0) {
            raise(Errc::key_gen_failed, "RSA keygen init failed");
        }
        EVP_PKEY* raw = nullptr;
        if (EVP_PKEY_generate(ctx.get(), &raw) <= 0) {
            raise(Errc::key_gen_failed, "RSA keygen failed");
        }
        PkeyPtr key(raw);

        KeyPair pair;
        pair.suite = id();
        int len = i2d_PUBKEY(key.get(), nullptr);
        if (len <= 0) raise(Errc::key_gen_failed, "public key DER encoding failed");
        pair.public_key.resize(static_cast<std::size_t>(len));
        unsigned char* out = pair.public_key.data();
        i2d_PUBKEY(key.get(), &out);

        len = i2d_PrivateKey(key.get(), nullptr);
        if (len <= 0) raise(Errc::key_gen_failed, "private key DER encoding failed");
        pair.private_key.resize(static_cast<std::size_t>(len));
        out = pair.private_key.data();
        i2d_PrivateKey(key.get(), &out);
        return pair;
    }

private:
    Blob256 do_encrypt(ByteSpan public_key, ByteSpan plaintext) const override {
        PkeyPtr key = parse_public(public_key);
        check_rsa2048(key.get());
        CtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
        if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) <= 0 ||
            EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_PADDING) <= 0) {
            raise(Errc::invalid_key, "RSA encrypt init failed");
        }
        Blob256 out{};
        std::size_t out_len = out.size();
        if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len, plaintext.data(),
                             plaintext.size()) <= 0 ||
            out_len != out.size()) {
            raise(Errc::invalid_key, "RSA encrypt failed");
        }
        return out;
    }

    std::optional<Bytes> do_decrypt(ByteSpan private_key, const Blob256& blob) const override {
        PkeyPtr key = parse_private(private_key);
        check_rsa2048(key.get());
        CtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
        if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) <= 0 ||
            EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_NO_PADDING) <= 0) {
            raise(Errc::invalid_key, "RSA decrypt init failed");
        }
        Blob256 raw{};
        std::size_t raw_len = raw.size();
        if (EVP_PKEY_decrypt(ctx.get(), raw.data(), &raw_len, blob.data(), blob.size()) <= 0 ||
            raw_len != raw.size()) {
            return std::nullopt;  // ciphertext not below the modulus
        }
        return unpad_pkcs1(raw);
    }

    Sig256 do_sign(ByteSpan private_key, ByteSpan data) const override {
        PkeyPtr key = parse_private(private_key);
        check_rsa2048(key.get());
        MdCtxPtr md(EVP_MD_CTX_new());
        if (!md ||
            EVP_DigestSignInit(md.get(), nullptr, EVP_sha512(), nullptr, key.get()) <= 0) {
            raise(Errc::sign_failed, "RSA sign init failed");
        }
        Sig256 sig{};
        std::size_t sig_len = sig.size();
        if (EVP_DigestSign(md.get(), sig.data(), &sig_len, data.data(), data.size()) <= 0 ||
            sig_len != sig.size()) {
            raise(Errc::sign_failed, "RSA sign failed");
        }
        return sig;
    }

    bool do_verify(ByteSpan public_key, ByteSpan data, const Sig256& signature) const override {
        PkeyPtr key;
        try {
            key = parse_public(public_key);
            check_rsa2048(key.get());
        } catch (const Error&) {
            return false;
        }
        MdCtxPtr md(EVP_MD_CTX_new());
        if (!md ||
            EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha512(), nullptr, key.get()) <= 0) {
            return false;
        }
        return EVP_DigestVerify(md.get(), signature.data(), signature.size(), data.data(),
                                data.size()) == 1;
    }
};

}  // namespace

const CipherSuite& reference_suite() {
    static const ReferenceSuite instance;
    return instance;
}

}  // namespace efpix

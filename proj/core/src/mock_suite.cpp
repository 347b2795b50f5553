#include "efpix/crypto/sha512.hpp"
#include "efpix/crypto/suite.hpp"
#include "efpix/error.hpp"

// Keyed, deterministic, length-preserving stand-in for the RSA suite. It is
// NOT encryption in any cryptographic sense: the "public" key doubles as the
// decryption secret. It exists so that large simulations keep the exact wire
// sizes and the hard wrong-key failure of the reference suite without paying
// for RSA on every hop.

namespace efpix {

namespace {

constexpr std::size_t kMaterialSize = 32;
constexpr std::size_t kTagSize = 9;
constexpr std::size_t kLenSize = 2;
constexpr char kPubPrefix[] = "efpix-mock-pub:";
constexpr char kPrvPrefix[] = "efpix-mock-prv:";

Bytes key_blob(std::string_view prefix, ByteSpan material) {
    Bytes out;
    append(out, str_span(prefix));
    append(out, material);
    return out;
}

// Shared secret behind either half of the key pair.
std::optional<std::array<std::uint8_t, kMaterialSize>> material_of(ByteSpan key) {
    for (std::string_view prefix : {std::string_view(kPubPrefix), std::string_view(kPrvPrefix)}) {
        if (key.size() == prefix.size() + kMaterialSize &&
            constant_time_equal(key.first(prefix.size()), str_span(prefix))) {
            return take_array<kMaterialSize>(key, prefix.size());
        }
    }
    return std::nullopt;
}

std::array<std::uint8_t, kMaterialSize> require_material(ByteSpan key) {
    auto m = material_of(key);
    if (!m.has_value()) raise(Errc::invalid_key, "not a mock suite key");
    return *m;
}

// SHA-512 based XOF: block i is SHA-512(label || seed parts || i).
void xof_fill(std::string_view label, std::initializer_list<ByteSpan> seed,
              std::span<std::uint8_t> out) {
    std::size_t written = 0;
    std::uint8_t counter = 0;
    while (written < out.size()) {
        Bytes input;
        append(input, str_span(label));
        for (ByteSpan part : seed) append(input, part);
        input.push_back(counter++);
        Hash64 block = sha512(input);
        std::size_t n = std::min(block.size(), out.size() - written);
        for (std::size_t i = 0; i < n; ++i) out[written + i] = block[i];
        written += n;
    }
}

class MockSuite final : public CipherSuite {
public:
    CipherSuiteId id() const override { return CipherSuiteId::mock_fixed_size; }

    KeyPair generate_keypair(const std::optional<Seed32>& seed) const override {
        if (!seed.has_value()) {
            raise(Errc::key_gen_failed, "mock suite requires an explicit 32-byte seed");
        }
        Hash64 material = sha512({str_span("efpix-mock-keygen"), as_span(*seed)});
        ByteSpan m(material.data(), kMaterialSize);
        KeyPair pair;
        pair.suite = id();
        pair.public_key = key_blob(kPubPrefix, m);
        pair.private_key = key_blob(kPrvPrefix, m);
        return pair;
    }

private:
    // Blob layout: tag(9) || xor-encrypted [len(2, big-endian) || body(245)].
    Blob256 do_encrypt(ByteSpan public_key, ByteSpan plaintext) const override {
        auto material = require_material(public_key);

        std::array<std::uint8_t, kLenSize + kMaxPlaintext> inner{};
        inner[0] = static_cast<std::uint8_t>(plaintext.size() >> 8);
        inner[1] = static_cast<std::uint8_t>(plaintext.size() & 0xff);
        for (std::size_t i = 0; i < plaintext.size(); ++i) inner[kLenSize + i] = plaintext[i];

        Hash64 tag_full = sha512({str_span("efpix-mock-tag"), as_span(material), as_span(inner)});
        Blob256 blob{};
        for (std::size_t i = 0; i < kTagSize; ++i) blob[i] = tag_full[i];

        std::array<std::uint8_t, kLenSize + kMaxPlaintext> stream{};
        xof_fill("efpix-mock-ks", {as_span(material), ByteSpan(blob.data(), kTagSize)}, stream);
        for (std::size_t i = 0; i < inner.size(); ++i) {
            blob[kTagSize + i] = inner[i] ^ stream[i];
        }
        return blob;
    }

    std::optional<Bytes> do_decrypt(ByteSpan private_key, const Blob256& blob) const override {
        auto material = material_of(private_key);
        if (!material.has_value()) return std::nullopt;

        std::array<std::uint8_t, kLenSize + kMaxPlaintext> stream{};
        xof_fill("efpix-mock-ks", {as_span(*material), ByteSpan(blob.data(), kTagSize)}, stream);
        std::array<std::uint8_t, kLenSize + kMaxPlaintext> inner{};
        for (std::size_t i = 0; i < inner.size(); ++i) inner[i] = blob[kTagSize + i] ^ stream[i];

        std::size_t len = (static_cast<std::size_t>(inner[0]) << 8) | inner[1];
        if (len < kMinPlaintext || len > kMaxPlaintext) return std::nullopt;
        for (std::size_t i = kLenSize + len; i < inner.size(); ++i) {
            if (inner[i] != 0) return std::nullopt;
        }

        Hash64 tag_full = sha512({str_span("efpix-mock-tag"), as_span(*material), as_span(inner)});
        if (!constant_time_equal(ByteSpan(blob.data(), kTagSize), ByteSpan(tag_full.data(), kTagSize))) {
            return std::nullopt;
        }
        return Bytes(inner.begin() + kLenSize, inner.begin() + static_cast<long>(kLenSize + len));
    }

    Sig256 do_sign(ByteSpan private_key, ByteSpan data) const override {
        auto material = require_material(private_key);
        Hash64 core = sha512({str_span("efpix-mock-sig"), as_span(material), data});
        Sig256 sig{};
        xof_fill("efpix-mock-sig-expand", {as_span(core)}, sig);
        return sig;
    }

    bool do_verify(ByteSpan public_key, ByteSpan data, const Sig256& signature) const override {
        auto material = material_of(public_key);
        if (!material.has_value()) return false;
        Hash64 core = sha512({str_span("efpix-mock-sig"), as_span(*material), data});
        Sig256 expect{};
        xof_fill("efpix-mock-sig-expand", {as_span(core)}, expect);
        return constant_time_equal(signature, expect);
    }
};

}  // namespace

const CipherSuite& mock_suite() {
    static const MockSuite instance;
    return instance;
}

}  // namespace efpix

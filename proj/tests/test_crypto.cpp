#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/x509.h>

#include <functional>

#include "efpix/crypto/pow.hpp"
#include "efpix/crypto/sha512.hpp"
#include "efpix/crypto/suite.hpp"
#include "efpix/error.hpp"
#include "support.hpp"

using namespace efpix;
using efpix::test::random_bytes;
using efpix::test::seed_of;

namespace {
const CipherSuite& mock() { return suite(CipherSuiteId::mock_fixed_size); }
const CipherSuite& reference() { return suite(CipherSuiteId::reference_rsa2048_sha512); }

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an efpix::Error");
    return Errc::io_error;
}
}  // namespace

TEST_CASE("mock keygen is deterministic and demands a seed") {
    KeyPair a = mock().generate_keypair(seed_of(0));
    KeyPair b = mock().generate_keypair(seed_of(0));
    CHECK(a.public_key == b.public_key);
    CHECK(a.private_key == b.private_key);
    CHECK(a.suite == CipherSuiteId::mock_fixed_size);

    KeyPair c = mock().generate_keypair(seed_of(1));
    CHECK(c.public_key != a.public_key);

    CHECK(code_of([] { mock().generate_keypair(std::nullopt); }) == Errc::key_gen_failed);
}

TEST_CASE("reference keygen produces a 2048-bit RSA key") {
    KeyPair pair = reference().generate_keypair();
    CHECK(pair.suite == CipherSuiteId::reference_rsa2048_sha512);

    const unsigned char* p = pair.public_key.data();
    EVP_PKEY* key = d2i_PUBKEY(nullptr, &p, static_cast<long>(pair.public_key.size()));
    REQUIRE(key != nullptr);
    BIGNUM* n = nullptr;
    REQUIRE(EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_RSA_N, &n) == 1);
    CHECK(BN_num_bytes(n) == 256);
    BN_free(n);
    EVP_PKEY_free(key);
}

TEST_CASE("encrypt/decrypt round trip is bit-exact across the length range") {
    Rng rng(0xc0ffee);
    for (CipherSuiteId id :
         {CipherSuiteId::mock_fixed_size, CipherSuiteId::reference_rsa2048_sha512}) {
        CAPTURE(suite_name(id));
        const CipherSuite& s = suite(id);
        KeyPair pair = s.generate_keypair(rng.seed32());
        for (std::size_t len : {std::size_t{29}, std::size_t{30}, std::size_t{100},
                                std::size_t{244}, std::size_t{245}}) {
            Bytes plain = random_bytes(rng, len);
            Blob256 blob = s.encrypt(as_span(pair.public_key), as_span(plain));
            auto back = s.decrypt(as_span(pair.private_key), as_span(blob));
            REQUIRE(back.has_value());
            CHECK(*back == plain);
        }
    }
}

TEST_CASE("encrypt enforces the 29..245 plaintext window") {
    Rng rng(7);
    for (CipherSuiteId id :
         {CipherSuiteId::mock_fixed_size, CipherSuiteId::reference_rsa2048_sha512}) {
        CAPTURE(suite_name(id));
        const CipherSuite& s = suite(id);
        KeyPair pair = s.generate_keypair(rng.seed32());
        Bytes too_long = random_bytes(rng, 246);
        Bytes too_short = random_bytes(rng, 28);
        CHECK(code_of([&] { s.encrypt(as_span(pair.public_key), as_span(too_long)); }) ==
              Errc::plaintext_too_long);
        CHECK(code_of([&] { s.encrypt(as_span(pair.public_key), as_span(too_short)); }) ==
              Errc::plaintext_too_short);
    }
}

TEST_CASE("decrypt rejects blobs that are not exactly 256 bytes") {
    Rng rng(9);
    KeyPair pair = mock().generate_keypair(rng.seed32());
    Bytes short_blob = random_bytes(rng, 255);
    CHECK(code_of([&] { mock().decrypt(as_span(pair.private_key), as_span(short_blob)); }) ==
          Errc::bad_length);
}

TEST_CASE("wrong-key decryption fails, never returns garbage") {
    Rng rng(0xdead);

    SUBCASE("mock, 1000 trials") {
        for (int i = 0; i < 1000; ++i) {
            KeyPair right = mock().generate_keypair(rng.seed32());
            KeyPair wrong = mock().generate_keypair(rng.seed32());
            Bytes plain = random_bytes(rng, 29 + rng.below(217));
            Blob256 blob = mock().encrypt(as_span(right.public_key), as_span(plain));
            CHECK_FALSE(mock().decrypt(as_span(wrong.private_key), as_span(blob)).has_value());
        }
    }

    SUBCASE("reference, 256 trials over two fixed key pairs") {
        KeyPair right = reference().generate_keypair();
        KeyPair wrong = reference().generate_keypair();
        for (int i = 0; i < 256; ++i) {
            Bytes plain = random_bytes(rng, 29 + rng.below(217));
            Blob256 blob = reference().encrypt(as_span(right.public_key), as_span(plain));
            CHECK_FALSE(reference().decrypt(as_span(wrong.private_key), as_span(blob)).has_value());
        }
    }

    SUBCASE("mock decrypt of random blobs fails") {
        KeyPair pair = mock().generate_keypair(rng.seed32());
        for (int i = 0; i < 1000; ++i) {
            Bytes noise = random_bytes(rng, 256);
            CHECK_FALSE(mock().decrypt(as_span(pair.private_key), as_span(noise)).has_value());
        }
    }
}

TEST_CASE("signatures are deterministic, 256 bytes, and sound") {
    Rng rng(0xbeef);
    for (CipherSuiteId id :
         {CipherSuiteId::mock_fixed_size, CipherSuiteId::reference_rsa2048_sha512}) {
        CAPTURE(suite_name(id));
        const CipherSuite& s = suite(id);
        KeyPair pair = s.generate_keypair(rng.seed32());
        Bytes data = random_bytes(rng, 245);

        Sig256 sig1 = s.sign(as_span(pair.private_key), as_span(data));
        Sig256 sig2 = s.sign(as_span(pair.private_key), as_span(data));
        CHECK(sig1 == sig2);
        CHECK(s.verify(as_span(pair.public_key), as_span(data), as_span(sig1)));

        Sig256 zero{};
        CHECK_FALSE(s.verify(as_span(pair.public_key), as_span(data), as_span(zero)));

        CHECK(code_of([&] { s.sign(as_span(pair.private_key), ByteSpan{}); }) ==
              Errc::precondition);
    }
}

TEST_CASE("verification fails under any single-byte mutation") {
    Rng rng(0x5eed);
    for (CipherSuiteId id :
         {CipherSuiteId::mock_fixed_size, CipherSuiteId::reference_rsa2048_sha512}) {
        CAPTURE(suite_name(id));
        const CipherSuite& s = suite(id);
        KeyPair pair = s.generate_keypair(rng.seed32());
        Bytes data = random_bytes(rng, 64);
        Sig256 sig = s.sign(as_span(pair.private_key), as_span(data));

        for (std::size_t i = 0; i < data.size(); ++i) {
            Bytes mutated = data;
            mutated[i] ^= 0x01;
            CHECK_FALSE(s.verify(as_span(pair.public_key), as_span(mutated), as_span(sig)));
        }
        for (std::size_t i = 0; i < sig.size(); ++i) {
            Sig256 mutated = sig;
            mutated[i] ^= 0x01;
            CHECK_FALSE(s.verify(as_span(pair.public_key), as_span(data), as_span(mutated)));
        }
    }
}

TEST_CASE("cross-key verification fails") {
    Rng rng(0xfeed);

    SUBCASE("mock, 1000 trials") {
        for (int i = 0; i < 1000; ++i) {
            KeyPair k1 = mock().generate_keypair(rng.seed32());
            KeyPair k2 = mock().generate_keypair(rng.seed32());
            Bytes data = random_bytes(rng, 1 + rng.below(200));
            Sig256 sig = mock().sign(as_span(k1.private_key), as_span(data));
            CHECK_FALSE(mock().verify(as_span(k2.public_key), as_span(data), as_span(sig)));
        }
    }

    SUBCASE("reference, 1000 trials over two fixed key pairs") {
        KeyPair k1 = reference().generate_keypair();
        KeyPair k2 = reference().generate_keypair();
        for (int i = 0; i < 1000; ++i) {
            Bytes data = random_bytes(rng, 1 + rng.below(200));
            Sig256 sig = reference().sign(as_span(k1.private_key), as_span(data));
            CHECK_FALSE(reference().verify(as_span(k2.public_key), as_span(data), as_span(sig)));
        }
    }
}

TEST_CASE("hash_message is a deterministic 64-byte digest of blob||signature") {
    Rng rng(0xabcd);
    Blob256 blob{};
    Sig256 sig{};
    rng.fill(blob);
    rng.fill(sig);

    Hash64 h1 = hash_message(blob, sig);
    Hash64 h2 = hash_message(blob, sig);
    CHECK(h1 == h2);
    CHECK(h1.size() == 64);
    CHECK(h1 == sha512({as_span(blob), as_span(sig)}));

    // collision-freedom spot check
    for (int i = 0; i < 1000; ++i) {
        Blob256 mutated = blob;
        std::size_t pos = rng.below(mutated.size());
        mutated[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
        CHECK(hash_message(mutated, sig) != h1);
    }
}

TEST_CASE("pow_check at difficulty zero accepts any nonce") {
    Rng rng(11);
    Hash64 h{};
    rng.fill(h);
    for (int i = 0; i < 16; ++i) {
        Nonce3 nonce = nonce_from_value(static_cast<std::uint32_t>(rng.below(kNonceSpace)));
        CHECK(pow_check(h, nonce, PowParams{0}));
    }
    CHECK(mine_nonce(h, PowParams{0}) == nonce_from_value(0));
}

TEST_CASE("mining is deterministic and the fixture nonce is frozen") {
    // SHA-512("efpix test vector 1"); nonce derived once by ascending search.
    Hash64 h = sha512(str_span("efpix test vector 1"));
    Nonce3 nonce = mine_nonce(h, PowParams{16});
    CHECK(to_hex(as_span(nonce)) == "007cc3");
    CHECK(nonce_value(nonce) == 31939);
    CHECK(pow_check(h, nonce, PowParams{16}));
    CHECK(mine_nonce(h, PowParams{16}) == nonce);
}

TEST_CASE("boundary fixture passes at 16 and fails at 17") {
    // SHA-512("efpix boundary 1") mines to a digest with exactly 16 leading
    // zero bits; found by scanning labeled hashes with the miner itself.
    Hash64 h = sha512(str_span("efpix boundary 1"));
    Nonce3 nonce = mine_nonce(h, PowParams{16});
    CHECK(nonce_value(nonce) == 264654);
    CHECK(leading_zero_bits(as_span(pow_digest(h, nonce))) == 16);
    CHECK(pow_check(h, nonce, PowParams{16}));
    CHECK_FALSE(pow_check(h, nonce, PowParams{17}));
}

TEST_CASE("pow monotonicity: passing at b implies passing below b") {
    Rng rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        Hash64 h{};
        rng.fill(h);
        Nonce3 nonce = mine_nonce(h, PowParams{12});
        for (std::uint32_t bits = 0; bits <= 12; ++bits) {
            CHECK(pow_check(h, nonce, PowParams{bits}));
        }
    }
}

TEST_CASE("mine_nonce returns the least passing nonce") {
    Rng rng(31);
    for (std::uint32_t bits : {8u, 10u, 12u}) {
        Hash64 h{};
        rng.fill(h);
        Nonce3 nonce = mine_nonce(h, PowParams{bits});
        std::uint32_t found = nonce_value(nonce);
        for (std::uint32_t smaller = 0; smaller < found; ++smaller) {
            REQUIRE_FALSE(pow_check(h, nonce_from_value(smaller), PowParams{bits}));
        }
    }
}

TEST_CASE("expected mining effort tracks 2^difficulty") {
    Rng rng(41);
    const std::uint32_t bits = 10;
    double total = 0;
    const int trials = 50;
    for (int i = 0; i < trials; ++i) {
        Hash64 h{};
        rng.fill(h);
        total += nonce_value(mine_nonce(h, PowParams{bits})) + 1;
    }
    double mean = total / trials;
    CHECK(mean > (1 << bits) / 3.0);
    CHECK(mean < (1 << bits) * 3.0);
}

TEST_CASE("difficulty ceiling is enforced") {
    CHECK_NOTHROW(PowParams{20}.validate());
    CHECK(code_of([] { PowParams{21}.validate(); }) == Errc::bad_difficulty);
    Hash64 h{};
    CHECK(code_of([&] { mine_nonce(h, PowParams{24}); }) == Errc::bad_difficulty);
}

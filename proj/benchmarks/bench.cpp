#include <benchmark/benchmark.h>

#include "efpix/codec.hpp"
#include "efpix/crypto/pow.hpp"
#include "efpix/crypto/suite.hpp"
#include "efpix/relay.hpp"
#include "efpix/rng.hpp"
#include "efpix/sim/simulator.hpp"

using namespace efpix;

namespace {

Seed32 seed_of(std::uint8_t fill) {
    Seed32 s{};
    s.fill(fill);
    return s;
}

Bytes random_bytes(Rng& rng, std::size_t n) {
    Bytes out(n);
    rng.fill(out);
    return out;
}

void BM_HashMessage(benchmark::State& state) {
    Rng rng(1);
    Blob256 blob{};
    Sig256 sig{};
    rng.fill(blob);
    rng.fill(sig);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hash_message(blob, sig));
    }
}
BENCHMARK(BM_HashMessage);

void BM_PowCheck(benchmark::State& state) {
    Rng rng(2);
    Hash64 h{};
    rng.fill(h);
    Nonce3 nonce = nonce_from_value(12345);
    PowParams pow{16};
    for (auto _ : state) {
        benchmark::DoNotOptimize(pow_check(h, nonce, pow));
    }
}
BENCHMARK(BM_PowCheck);

void BM_MineNonce(benchmark::State& state) {
    Rng rng(3);
    PowParams pow{static_cast<std::uint32_t>(state.range(0))};
    for (auto _ : state) {
        Hash64 h{};
        rng.fill(h);
        benchmark::DoNotOptimize(mine_nonce(h, pow));
    }
}
BENCHMARK(BM_MineNonce)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MockEncrypt(benchmark::State& state) {
    const CipherSuite& s = suite(CipherSuiteId::mock_fixed_size);
    KeyPair pair = s.generate_keypair(seed_of(1));
    Rng rng(4);
    Bytes plain = random_bytes(rng, 245);
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.encrypt(as_span(pair.public_key), as_span(plain)));
    }
}
BENCHMARK(BM_MockEncrypt);

void BM_MockDecryptNotForMe(benchmark::State& state) {
    const CipherSuite& s = suite(CipherSuiteId::mock_fixed_size);
    KeyPair right = s.generate_keypair(seed_of(1));
    KeyPair wrong = s.generate_keypair(seed_of(2));
    Rng rng(5);
    Bytes plain = random_bytes(rng, 245);
    Blob256 blob = s.encrypt(as_span(right.public_key), as_span(plain));
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.decrypt(as_span(wrong.private_key), as_span(blob)));
    }
}
BENCHMARK(BM_MockDecryptNotForMe);

void BM_ReferenceSign(benchmark::State& state) {
    const CipherSuite& s = suite(CipherSuiteId::reference_rsa2048_sha512);
    KeyPair pair = s.generate_keypair();
    Rng rng(6);
    Bytes data = random_bytes(rng, 245);
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.sign(as_span(pair.private_key), as_span(data)));
    }
}
BENCHMARK(BM_ReferenceSign)->Unit(benchmark::kMicrosecond);

void BM_ReferenceEncrypt(benchmark::State& state) {
    const CipherSuite& s = suite(CipherSuiteId::reference_rsa2048_sha512);
    KeyPair pair = s.generate_keypair();
    Rng rng(7);
    Bytes plain = random_bytes(rng, 245);
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.encrypt(as_span(pair.public_key), as_span(plain)));
    }
}
BENCHMARK(BM_ReferenceEncrypt)->Unit(benchmark::kMicrosecond);

void BM_SerializeParseMessage(benchmark::State& state) {
    Rng rng(8);
    EncodedMessage m;
    rng.fill(m.hash);
    rng.fill(m.nonce);
    rng.fill(m.encrypted_blob);
    rng.fill(m.signature);
    for (auto _ : state) {
        Bytes wire = serialize_message(m);
        benchmark::DoNotOptimize(parse_message(as_span(wire)));
    }
}
BENCHMARK(BM_SerializeParseMessage);

void BM_SeenStoreInsertContains(benchmark::State& state) {
    SeenHashStore store(1 << 20, ~Duration{0} / 2);
    Rng rng(9);
    Timestamp now = 0;
    for (auto _ : state) {
        Hash64 h{};
        rng.fill(h);
        store.insert(h, ++now);
        benchmark::DoNotOptimize(store.contains(h));
    }
}
BENCHMARK(BM_SeenStoreInsertContains);

void BM_OnReceiveNotForMe(benchmark::State& state) {
    const CipherSuite& s = suite(CipherSuiteId::mock_fixed_size);
    KeyPair ka = s.generate_keypair(seed_of(1));
    KeyPair kb = s.generate_keypair(seed_of(2));
    KeyPair kc = s.generate_keypair(seed_of(3));

    NodeConfig config;
    config.pow.difficulty_bits = 8;
    ContactBook book_a(ka);
    book_a.add_contact(Contact{"bob", kb.public_key, "alice"});
    RelayNode alice(config, std::move(book_a), CipherSuiteId::mock_fixed_size);
    RelayNode carol(config, ContactBook(kc), CipherSuiteId::mock_fixed_size);

    Timestamp now = 1'700'000'000'000'000ULL;
    Rng rng(10);
    for (auto _ : state) {
        state.PauseTiming();
        Bytes msg = random_bytes(rng, 64);
        Bytes fresh = serialize_message(alice.create_message("bob", 0, as_span(msg), ++now));
        state.ResumeTiming();
        benchmark::DoNotOptimize(carol.on_receive(as_span(fresh), now));
    }
}
BENCHMARK(BM_OnReceiveNotForMe);

void BM_FloodSimulation(benchmark::State& state) {
    using namespace efpix::sim;
    std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(11);
    Scenario sc;
    sc.seed = 1;
    for (std::size_t i = 0; i < n; ++i) {
        NodeSpec spec;
        spec.id = "n" + std::to_string(i);
        spec.config.pow.difficulty_bits = 8;
        sc.nodes.push_back(spec);
    }
    for (std::size_t i = 1; i < n; ++i) {
        EdgeSpec e;
        e.a = "n" + std::to_string(rng.below(i));
        e.b = "n" + std::to_string(i);
        sc.edges.push_back(e);
    }
    SendEvent send;
    send.from = "n0";
    send.to = "n" + std::to_string(n - 1);
    send.message = {'b', 'e', 'n', 'c', 'h'};
    sc.events.push_back(ScenarioEvent{0, send});

    for (auto _ : state) {
        benchmark::DoNotOptimize(run_simulation(sc));
    }
}
BENCHMARK(BM_FloodSimulation)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#pragma once

#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "efpix/bytes.hpp"
#include "efpix/codec.hpp"
#include "efpix/crypto/pow.hpp"
#include "efpix/crypto/suite.hpp"
#include "efpix/identity.hpp"
#include "efpix/rng.hpp"

namespace efpix {

struct NodeConfig {
    PowParams pow{};
    Duration max_message_age = 86'400'000'000;     // 24 h
    Duration future_skew_tolerance = 120'000'000;  // 120 s
    std::size_t seen_capacity = 1'048'576;
    Duration seen_retention = 86'400'000'000;
    Duration relay_delay_max = 0;
    double dummy_rate_per_s = 0.0;
    bool echo_suppression = true;

    // A message must stay deduplicable at least as long as it is acceptable.
    void validate() const;
};

// Bounded FIFO of relayed-message hashes. first_seen values are expected to
// be non-decreasing across inserts (they are queue order).
class SeenHashStore {
public:
    SeenHashStore(std::size_t capacity, Duration retention)
        : capacity_(capacity), retention_(retention) {}

    // No-op if already present. Evicts oldest entries beyond capacity.
    void insert(const Hash64& hash, Timestamp now);
    bool contains(const Hash64& hash) const;

    // Drops entries older than the retention window; returns how many.
    std::size_t evict(Timestamp now);

    std::size_t size() const { return queue_.size(); }
    std::size_t capacity() const { return capacity_; }
    Duration retention() const { return retention_; }

private:
    std::size_t capacity_;
    Duration retention_;
    std::deque<std::pair<Hash64, Timestamp>> queue_;
    std::unordered_map<Hash64, Timestamp, Hash64Key> index_;
};

enum class DropReason { malformed, bad_version, bad_hash, bad_pow, duplicate };
enum class RejectReason { bad_signature, too_old, from_future };
enum class Authenticity { verified, anonymous };

struct RelayDecision {
    bool relay = false;
    std::optional<DropReason> drop_reason;
};

struct DecodedResult {
    Bytes message;
    Timestamp received_at = 0;
    Timestamp created_at = 0;
    std::string sender_alias;
    std::uint32_t internal_address = 0;
    Authenticity authenticity = Authenticity::anonymous;
};

struct DecodeOutcome {
    enum class Kind { not_for_me, delivered, rejected };
    Kind kind = Kind::not_for_me;
    std::optional<DecodedResult> result;      // delivered
    std::optional<RejectReason> reject;       // rejected

    static DecodeOutcome not_for_me() { return {}; }
    static DecodeOutcome delivered(DecodedResult r) {
        return {Kind::delivered, std::move(r), std::nullopt};
    }
    static DecodeOutcome rejected(RejectReason r) { return {Kind::rejected, std::nullopt, r}; }
};

struct ReceiveResult {
    RelayDecision decision;
    std::optional<DecodeOutcome> outcome;       // absent when the frame was dropped unparsed
    std::optional<Hash64> message_hash;         // present once the frame parsed
};

const char* drop_reason_name(DropReason r);
const char* reject_reason_name(RejectReason r);

using LinkId = std::uint64_t;

// Sender pipeline: concatenate, sign, encrypt, hash, mine, assemble.
EncodedMessage create_message(const CipherSuite& suite, const ContactBook& book,
                              std::string_view recipient_alias, std::uint32_t internal_address,
                              ByteSpan message, Timestamp created_at, const PowParams& pow);

// Wire-valid frame encrypted to a throwaway key pair whose private half is
// discarded; no node can decrypt it.
EncodedMessage make_dummy(const CipherSuite& suite, Timestamp now, const PowParams& pow, Rng& rng);

// One protocol endpoint: dedup store, contact book, receive pipeline. Calls
// that mutate the seen store (on_receive, originate) must be serialized per
// node; the relay fan-out of an accepted frame may run concurrently with
// later receives.
class RelayNode {
public:
    RelayNode(NodeConfig config, ContactBook book, CipherSuiteId suite_id);

    const NodeConfig& config() const { return config_; }
    ContactBook& book() { return book_; }
    const ContactBook& book() const { return book_; }
    const CipherSuite& cipher() const { return *suite_; }

    void set_neighbors(std::vector<LinkId> links) { neighbors_ = std::move(links); }
    const std::vector<LinkId>& neighbors() const { return neighbors_; }

    EncodedMessage create_message(std::string_view recipient_alias,
                                  std::uint32_t internal_address, ByteSpan message,
                                  Timestamp created_at) const;

    // create_message plus recording the hash as seen, so the echo coming back
    // from neighbors is deduplicated. Locally originated frames do not pass
    // through on_receive.
    Bytes originate(std::string_view recipient_alias, std::uint32_t internal_address,
                    ByteSpan message, Timestamp created_at);

    // Total over arbitrary bytes; never throws.
    ReceiveResult on_receive(ByteSpan wire, Timestamp received_at);

    // All current neighbors minus the arrival link (when echo suppression is
    // on). arrival == nullopt means locally originated.
    std::vector<LinkId> relay_targets(std::optional<LinkId> arrival) const;

    EncodedMessage make_dummy(Timestamp now, Rng& rng) const;

    SeenHashStore& seen_store() { return seen_; }
    const SeenHashStore& seen_store() const { return seen_; }

private:
    NodeConfig config_;
    ContactBook book_;
    const CipherSuite* suite_;
    SeenHashStore seen_;
    std::vector<LinkId> neighbors_;
};

}  // namespace efpix

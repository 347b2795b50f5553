#include "efpix/relay.hpp"

#include <algorithm>

#include "efpix/error.hpp"

namespace efpix {

void NodeConfig::validate() const {
    pow.validate();
    if (max_message_age > seen_retention) {
        raise(Errc::config_error, "max_message_age exceeds seen_retention");
    }
    if (dummy_rate_per_s < 0.0) raise(Errc::config_error, "dummy_rate_per_s is negative");
}

void SeenHashStore::insert(const Hash64& hash, Timestamp now) {
    if (index_.contains(hash)) return;
    queue_.emplace_back(hash, now);
    index_.emplace(hash, now);
    while (queue_.size() > capacity_) {
        index_.erase(queue_.front().first);
        queue_.pop_front();
    }
}

bool SeenHashStore::contains(const Hash64& hash) const { return index_.contains(hash); }

std::size_t SeenHashStore::evict(Timestamp now) {
    std::size_t evicted = 0;
    while (!queue_.empty() && queue_.front().second + retention_ <= now) {
        index_.erase(queue_.front().first);
        queue_.pop_front();
        ++evicted;
    }
    return evicted;
}

const char* drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::malformed: return "MALFORMED";
        case DropReason::bad_version: return "BAD_VERSION";
        case DropReason::bad_hash: return "BAD_HASH";
        case DropReason::bad_pow: return "BAD_POW";
        case DropReason::duplicate: return "DUPLICATE";
    }
    return "?";
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::bad_signature: return "BAD_SIGNATURE";
        case RejectReason::too_old: return "TOO_OLD";
        case RejectReason::from_future: return "FROM_FUTURE";
    }
    return "?";
}

EncodedMessage create_message(const CipherSuite& suite, const ContactBook& book,
                              std::string_view recipient_alias, std::uint32_t internal_address,
                              ByteSpan message, Timestamp created_at, const PowParams& pow) {
    const Contact* recipient = book.lookup_sender(recipient_alias);
    if (recipient == nullptr) {
        raise(Errc::unknown_recipient, "no contact '" + std::string(recipient_alias) + "'");
    }

    PlainPayload payload;
    payload.created_at = created_at;
    payload.sender_alias = recipient->my_alias_for_them;
    payload.internal_address = internal_address;
    payload.message.assign(message.begin(), message.end());
    Bytes plain = serialize_payload(payload);

    EncodedMessage out;
    out.version = kWireVersion;
    out.signature = suite.sign(as_span(book.own_keypair().private_key), as_span(plain));
    out.encrypted_blob = suite.encrypt(as_span(recipient->their_public_key), as_span(plain));
    out.hash = hash_message(out.encrypted_blob, out.signature);
    out.nonce = mine_nonce(out.hash, pow);
    return out;
}

EncodedMessage make_dummy(const CipherSuite& suite, Timestamp now, const PowParams& pow,
                          Rng& rng) {
    KeyPair throwaway = suite.generate_keypair(rng.seed32());

    PlainPayload payload;
    payload.created_at = now;
    char alias[9] = {};
    for (int i = 0; i < 8; ++i) alias[i] = static_cast<char>('a' + rng.below(26));
    payload.sender_alias = alias;
    payload.internal_address = static_cast<std::uint32_t>(rng.next());
    payload.message.resize(rng.below(kMaxMessageSize + 1));
    rng.fill(payload.message);
    Bytes plain = serialize_payload(payload);

    EncodedMessage out;
    out.version = kWireVersion;
    out.signature = suite.sign(as_span(throwaway.private_key), as_span(plain));
    out.encrypted_blob = suite.encrypt(as_span(throwaway.public_key), as_span(plain));
    out.hash = hash_message(out.encrypted_blob, out.signature);
    out.nonce = mine_nonce(out.hash, pow);
    return out;
}

RelayNode::RelayNode(NodeConfig config, ContactBook book, CipherSuiteId suite_id)
    : config_(config),
      book_(std::move(book)),
      suite_(&suite(suite_id)),
      seen_(config.seen_capacity, config.seen_retention) {
    config_.validate();
}

EncodedMessage RelayNode::create_message(std::string_view recipient_alias,
                                         std::uint32_t internal_address, ByteSpan message,
                                         Timestamp created_at) const {
    return efpix::create_message(*suite_, book_, recipient_alias, internal_address, message,
                                 created_at, config_.pow);
}

Bytes RelayNode::originate(std::string_view recipient_alias, std::uint32_t internal_address,
                           ByteSpan message, Timestamp created_at) {
    EncodedMessage encoded =
        create_message(recipient_alias, internal_address, message, created_at);
    seen_.insert(encoded.hash, created_at);
    return serialize_message(encoded);
}

ReceiveResult RelayNode::on_receive(ByteSpan wire, Timestamp received_at) {
    ReceiveResult result;

    EncodedMessage message;
    try {
        message = parse_message(wire);
    } catch (const Error& e) {
        result.decision.drop_reason = e.code() == Errc::unsupported_version
                                          ? DropReason::bad_version
                                          : DropReason::malformed;
        return result;
    }
    result.message_hash = message.hash;

    if (hash_message(message.encrypted_blob, message.signature) != message.hash) {
        result.decision.drop_reason = DropReason::bad_hash;
        return result;
    }
    if (!pow_check(message.hash, message.nonce, config_.pow)) {
        result.decision.drop_reason = DropReason::bad_pow;
        return result;
    }

    seen_.evict(received_at);
    if (seen_.contains(message.hash)) {
        result.decision.drop_reason = DropReason::duplicate;
        return result;
    }
    seen_.insert(message.hash, received_at);
    result.decision.relay = true;

    std::optional<Bytes> plain =
        suite_->decrypt(as_span(book_.own_keypair().private_key), as_span(message.encrypted_blob));
    if (!plain.has_value()) {
        result.outcome = DecodeOutcome::not_for_me();
        return result;
    }

    PlainPayload payload;
    try {
        payload = parse_payload(as_span(*plain));
    } catch (const Error&) {
        // Decryption produced bytes that are not a payload; for every
        // practical purpose this blob was not addressed to us.
        result.outcome = DecodeOutcome::not_for_me();
        return result;
    }

    const Contact* sender = book_.lookup_sender(payload.sender_alias);
    Authenticity authenticity = Authenticity::anonymous;
    if (sender != nullptr) {
        if (!suite_->verify(as_span(sender->their_public_key), as_span(*plain),
                            as_span(message.signature))) {
            result.outcome = DecodeOutcome::rejected(RejectReason::bad_signature);
            return result;
        }
        authenticity = Authenticity::verified;
    }

    if (payload.created_at > received_at + config_.future_skew_tolerance) {
        result.outcome = DecodeOutcome::rejected(RejectReason::from_future);
        return result;
    }
    if (received_at >= payload.created_at &&
        received_at - payload.created_at >= config_.max_message_age) {
        result.outcome = DecodeOutcome::rejected(RejectReason::too_old);
        return result;
    }

    DecodedResult decoded;
    decoded.message = std::move(payload.message);
    decoded.received_at = received_at;
    decoded.created_at = payload.created_at;
    decoded.sender_alias = std::move(payload.sender_alias);
    decoded.internal_address = payload.internal_address;
    decoded.authenticity = authenticity;
    result.outcome = DecodeOutcome::delivered(std::move(decoded));
    return result;
}

std::vector<LinkId> RelayNode::relay_targets(std::optional<LinkId> arrival) const {
    std::vector<LinkId> targets;
    targets.reserve(neighbors_.size());
    for (LinkId link : neighbors_) {
        if (config_.echo_suppression && arrival.has_value() && link == *arrival) continue;
        targets.push_back(link);
    }
    return targets;
}

EncodedMessage RelayNode::make_dummy(Timestamp now, Rng& rng) const {
    if (config_.dummy_rate_per_s <= 0.0) {
        raise(Errc::precondition, "dummy traffic is disabled (dummy_rate_per_s = 0)");
    }
    return efpix::make_dummy(*suite_, now, config_.pow, rng);
}

}  // namespace efpix

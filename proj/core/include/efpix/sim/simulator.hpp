#pragma once

#include <map>
#include <string>
#include <vector>

#include "efpix/sim/scenario.hpp"

namespace efpix::sim {

struct ObserverFrame {
    Timestamp at = 0;
    std::string link;  // "sender->observer"
    Bytes frame;
};

struct MessageStat {
    bool is_dummy = false;
    std::string from;
    std::string to;  // empty for dummies
    Hash64 hash{};
    Bytes plaintext;  // the user message, dummies excluded
    Timestamp sent_at = 0;
    bool delivered = false;
    Timestamp delivered_at = 0;
    Bytes delivered_message;
    std::string delivered_alias;
    Authenticity delivered_authenticity = Authenticity::anonymous;
    std::uint64_t transmissions = 0;
    std::map<std::string, std::uint64_t> relays;          // node -> relay count
    std::map<std::string, std::uint64_t> outcome_counts;  // outcome name -> count
};

struct ReceiveRecord {
    Timestamp at = 0;
    std::string node;
    std::string from;
    bool via_replay = false;  // sim-level bookkeeping; the frame itself is identical
    bool relayed = false;
    std::optional<DropReason> drop;
    std::optional<DecodeOutcome::Kind> outcome;
    std::optional<RejectReason> reject;
    int message_index = -1;  // -1 when the frame never registered
};

struct SimMetrics {
    std::uint64_t seed = 0;
    std::string suite;
    Timestamp end_time = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t duplicate_drops = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t dummy_count = 0;
    std::uint64_t frames_to_inactive = 0;
    std::vector<MessageStat> messages;
    std::map<std::string, std::uint64_t> relay_count;
    std::map<std::string, std::vector<ObserverFrame>> observer_logs;
    std::vector<ReceiveRecord> receive_log;
    bool assertions_passed = true;
    std::vector<std::string> assertion_failures;
};

// Deterministic single-threaded event loop: identical (scenario, seed) yields
// identical metrics, observer logs included. Simulated time is integer
// microseconds starting at zero.
SimMetrics run_simulation(const Scenario& scenario);
SimMetrics run_simulation(const Scenario& scenario, std::uint64_t seed_override);

std::string metrics_to_json(const SimMetrics& metrics, bool include_receive_log = false);
std::string metrics_to_csv(const SimMetrics& metrics);

}  // namespace efpix::sim

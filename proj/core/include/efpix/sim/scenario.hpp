#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "efpix/relay.hpp"

namespace efpix::sim {

enum class NodeRole { honest, dropper, replayer, observer };

const char* role_name(NodeRole role);
NodeRole role_from_name(std::string_view name);

struct NodeSpec {
    std::string id;
    NodeRole role = NodeRole::honest;
    NodeConfig config;
    // Aliases this node's contact book holds; nullopt = everybody.
    std::optional<std::vector<std::string>> known_contacts;
    // Replayer only: per-frame re-broadcast offsets from first sight.
    std::vector<Duration> replay_delays;
};

struct EdgeSpec {
    std::string a;
    std::string b;
    Duration latency_min = 1000;
    Duration latency_max = 1000;
};

struct SendEvent {
    std::string from;
    std::string to;
    std::uint32_t internal_address = 0;
    Bytes message;
};
struct LinkChange {
    std::string a;
    std::string b;
    bool up = false;
};
struct NodeChange {
    std::string id;
    bool join = false;
};

struct ScenarioEvent {
    Timestamp at = 0;
    std::variant<SendEvent, LinkChange, NodeChange> action;
};

struct ScenarioAssertions {
    std::optional<bool> all_delivered;
    std::optional<std::uint64_t> max_transmissions_per_message;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    CipherSuiteId suite = CipherSuiteId::mock_fixed_size;
    std::optional<Duration> duration;  // required when dummy traffic is on
    std::vector<NodeSpec> nodes;
    std::vector<EdgeSpec> edges;
    std::vector<ScenarioEvent> events;
    ScenarioAssertions assertions;

    // Unique node ids, edges between known distinct nodes, events referencing
    // known nodes/edges. Throws Error{scenario_error}.
    void validate() const;

    std::optional<std::size_t> node_index(std::string_view id) const;
};

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace efpix::sim

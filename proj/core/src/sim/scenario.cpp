#include "efpix/sim/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "efpix/error.hpp"

namespace efpix::sim {

using nlohmann::json;
using nlohmann::ordered_json;

const char* role_name(NodeRole role) {
    switch (role) {
        case NodeRole::honest: return "honest";
        case NodeRole::dropper: return "dropper";
        case NodeRole::replayer: return "replayer";
        case NodeRole::observer: return "observer";
    }
    return "?";
}

NodeRole role_from_name(std::string_view name) {
    if (name == "honest") return NodeRole::honest;
    if (name == "dropper") return NodeRole::dropper;
    if (name == "replayer") return NodeRole::replayer;
    if (name == "observer") return NodeRole::observer;
    raise(Errc::scenario_error, "unknown node role '" + std::string(name) + "'");
}

void Scenario::validate() const {
    std::set<std::string> ids;
    for (const NodeSpec& node : nodes) {
        if (node.id.empty()) raise(Errc::scenario_error, "node with empty id");
        if (!ids.insert(node.id).second) {
            raise(Errc::scenario_error, "duplicate node id '" + node.id + "'");
        }
        node.config.validate();
        if (node.config.dummy_rate_per_s > 0.0 && !duration.has_value()) {
            raise(Errc::scenario_error, "dummy traffic requires an explicit duration");
        }
        if (node.known_contacts.has_value()) {
            for (const std::string& c : *node.known_contacts) {
                bool known = false;
                for (const NodeSpec& other : nodes) known = known || other.id == c;
                if (!known) {
                    raise(Errc::scenario_error,
                          "node '" + node.id + "' lists unknown contact '" + c + "'");
                }
            }
        }
    }
    std::set<std::pair<std::string, std::string>> seen_edges;
    for (const EdgeSpec& edge : edges) {
        if (!ids.contains(edge.a) || !ids.contains(edge.b)) {
            raise(Errc::scenario_error, "edge " + edge.a + "--" + edge.b + " references unknown node");
        }
        if (edge.a == edge.b) raise(Errc::scenario_error, "self-loop on '" + edge.a + "'");
        auto key = std::minmax(edge.a, edge.b);
        if (!seen_edges.insert(key).second) {
            raise(Errc::scenario_error, "duplicate edge " + edge.a + "--" + edge.b);
        }
        if (edge.latency_min > edge.latency_max) {
            raise(Errc::scenario_error, "edge " + edge.a + "--" + edge.b + " latency range inverted");
        }
    }
    for (const ScenarioEvent& event : events) {
        if (const auto* send = std::get_if<SendEvent>(&event.action)) {
            if (!ids.contains(send->from)) {
                raise(Errc::scenario_error, "send from unknown node '" + send->from + "'");
            }
            if (!ids.contains(send->to)) {
                raise(Errc::scenario_error, "send to unknown node '" + send->to + "'");
            }
            if (send->from == send->to) {
                raise(Errc::scenario_error, "send from '" + send->from + "' to itself");
            }
        } else if (const auto* link = std::get_if<LinkChange>(&event.action)) {
            auto key = std::minmax(link->a, link->b);
            if (!seen_edges.contains(key)) {
                raise(Errc::scenario_error,
                      "link event on unknown edge " + link->a + "--" + link->b);
            }
        } else if (const auto* node = std::get_if<NodeChange>(&event.action)) {
            if (!ids.contains(node->id)) {
                raise(Errc::scenario_error, "node event on unknown node '" + node->id + "'");
            }
        }
    }
}

std::optional<std::size_t> Scenario::node_index(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

namespace {

NodeConfig config_from_json(const json& j, NodeConfig base) {
    if (j.contains("pow_difficulty_bits")) {
        base.pow.difficulty_bits = j.at("pow_difficulty_bits").get<std::uint32_t>();
    }
    if (j.contains("max_message_age_us")) {
        base.max_message_age = j.at("max_message_age_us").get<Duration>();
    }
    if (j.contains("future_skew_us")) {
        base.future_skew_tolerance = j.at("future_skew_us").get<Duration>();
    }
    if (j.contains("seen_capacity")) base.seen_capacity = j.at("seen_capacity").get<std::size_t>();
    if (j.contains("seen_retention_us")) {
        base.seen_retention = j.at("seen_retention_us").get<Duration>();
    }
    if (j.contains("relay_delay_max_us")) {
        base.relay_delay_max = j.at("relay_delay_max_us").get<Duration>();
    }
    if (j.contains("dummy_rate_per_s")) {
        base.dummy_rate_per_s = j.at("dummy_rate_per_s").get<double>();
    }
    if (j.contains("echo_suppression")) base.echo_suppression = j.at("echo_suppression").get<bool>();
    return base;
}

Bytes message_from_json(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        return Bytes(s.begin(), s.end());
    }
    if (j.is_object() && j.contains("hex")) return from_hex(j.at("hex").get<std::string>());
    raise(Errc::scenario_error, "message must be a string or {\"hex\": ...}");
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        raise(Errc::scenario_error, std::string("scenario JSON: ") + e.what());
    }

    try {
        Scenario sc;
        sc.name = doc.value("name", "scenario");
        sc.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("suite")) sc.suite = suite_from_name(doc.at("suite").get<std::string>());
        if (doc.contains("duration_us")) sc.duration = doc.at("duration_us").get<Duration>();

        NodeConfig defaults;
        defaults.pow.difficulty_bits = 8;  // simulation default; daemons pin their own
        if (doc.contains("defaults")) defaults = config_from_json(doc.at("defaults"), defaults);

        for (const json& n : doc.at("nodes")) {
            NodeSpec spec;
            if (n.is_string()) {
                spec.id = n.get<std::string>();
                spec.config = defaults;
            } else {
                spec.id = n.at("id").get<std::string>();
                spec.role = role_from_name(n.value("role", "honest"));
                spec.config = n.contains("config") ? config_from_json(n.at("config"), defaults)
                                                   : defaults;
                if (n.contains("known_contacts")) {
                    spec.known_contacts = n.at("known_contacts").get<std::vector<std::string>>();
                }
                if (n.contains("replay_delays_us")) {
                    spec.replay_delays = n.at("replay_delays_us").get<std::vector<Duration>>();
                }
            }
            sc.nodes.push_back(std::move(spec));
        }

        for (const json& e : doc.at("edges")) {
            EdgeSpec edge;
            edge.a = e.at("a").get<std::string>();
            edge.b = e.at("b").get<std::string>();
            if (e.contains("latency_us")) {
                edge.latency_min = edge.latency_max = e.at("latency_us").get<Duration>();
            } else {
                edge.latency_min = e.value("latency_min_us", Duration{1000});
                edge.latency_max = e.value("latency_max_us", edge.latency_min);
            }
            sc.edges.push_back(std::move(edge));
        }

        if (doc.contains("events")) {
            for (const json& ev : doc.at("events")) {
                ScenarioEvent event;
                event.at = ev.at("at_us").get<Timestamp>();
                if (ev.contains("send")) {
                    const json& s = ev.at("send");
                    SendEvent send;
                    send.from = s.at("from").get<std::string>();
                    send.to = s.at("to").get<std::string>();
                    send.internal_address = s.value("internal_address", 0u);
                    send.message = message_from_json(s.at("message"));
                    event.action = std::move(send);
                } else if (ev.contains("link_down") || ev.contains("link_up")) {
                    bool up = ev.contains("link_up");
                    const json& l = up ? ev.at("link_up") : ev.at("link_down");
                    event.action =
                        LinkChange{l.at("a").get<std::string>(), l.at("b").get<std::string>(), up};
                } else if (ev.contains("node_join") || ev.contains("node_leave")) {
                    bool join = ev.contains("node_join");
                    event.action = NodeChange{
                        (join ? ev.at("node_join") : ev.at("node_leave")).get<std::string>(), join};
                } else {
                    raise(Errc::scenario_error, "event with no recognized action");
                }
                sc.events.push_back(std::move(event));
            }
        }

        if (doc.contains("assertions")) {
            const json& a = doc.at("assertions");
            if (a.contains("all_delivered")) {
                sc.assertions.all_delivered = a.at("all_delivered").get<bool>();
            }
            if (a.contains("max_transmissions_per_message")) {
                sc.assertions.max_transmissions_per_message =
                    a.at("max_transmissions_per_message").get<std::uint64_t>();
            }
        }

        sc.validate();
        return sc;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        raise(Errc::scenario_error, std::string("scenario JSON: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::not_found, "scenario file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scenario_from_json(text);
}

std::string scenario_to_json(const Scenario& scenario) {
    ordered_json doc;
    doc["name"] = scenario.name;
    doc["seed"] = scenario.seed;
    doc["suite"] = std::string(suite_name(scenario.suite));
    if (scenario.duration.has_value()) doc["duration_us"] = *scenario.duration;

    auto config_json = [](const NodeConfig& c) {
        return ordered_json{
            {"pow_difficulty_bits", c.pow.difficulty_bits},
            {"max_message_age_us", c.max_message_age},
            {"future_skew_us", c.future_skew_tolerance},
            {"seen_capacity", c.seen_capacity},
            {"seen_retention_us", c.seen_retention},
            {"relay_delay_max_us", c.relay_delay_max},
            {"dummy_rate_per_s", c.dummy_rate_per_s},
            {"echo_suppression", c.echo_suppression},
        };
    };

    doc["nodes"] = ordered_json::array();
    for (const NodeSpec& n : scenario.nodes) {
        ordered_json j{{"id", n.id}, {"role", role_name(n.role)}, {"config", config_json(n.config)}};
        if (n.known_contacts.has_value()) j["known_contacts"] = *n.known_contacts;
        if (!n.replay_delays.empty()) j["replay_delays_us"] = n.replay_delays;
        doc["nodes"].push_back(std::move(j));
    }
    doc["edges"] = ordered_json::array();
    for (const EdgeSpec& e : scenario.edges) {
        doc["edges"].push_back(ordered_json{{"a", e.a},
                                            {"b", e.b},
                                            {"latency_min_us", e.latency_min},
                                            {"latency_max_us", e.latency_max}});
    }
    doc["events"] = ordered_json::array();
    for (const ScenarioEvent& ev : scenario.events) {
        ordered_json j{{"at_us", ev.at}};
        if (const auto* send = std::get_if<SendEvent>(&ev.action)) {
            j["send"] = ordered_json{{"from", send->from},
                                     {"to", send->to},
                                     {"internal_address", send->internal_address},
                                     {"message", ordered_json{{"hex", to_hex(as_span(send->message))}}}};
        } else if (const auto* link = std::get_if<LinkChange>(&ev.action)) {
            j[link->up ? "link_up" : "link_down"] = ordered_json{{"a", link->a}, {"b", link->b}};
        } else if (const auto* node = std::get_if<NodeChange>(&ev.action)) {
            j[node->join ? "node_join" : "node_leave"] = node->id;
        }
        doc["events"].push_back(std::move(j));
    }
    return doc.dump(2);
}

}  // namespace efpix::sim

#include "efpix/sim/simulator.hpp"

#include <algorithm>
#include <json.hpp>
#include <memory>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "efpix/error.hpp"

namespace efpix::sim {

namespace {

const char* outcome_name(DecodeOutcome::Kind kind) {
    switch (kind) {
        case DecodeOutcome::Kind::not_for_me: return "NOT_FOR_ME";
        case DecodeOutcome::Kind::delivered: return "DELIVERED";
        case DecodeOutcome::Kind::rejected: return "REJECTED";
    }
    return "?";
}

struct SimEvent {
    Timestamp at = 0;
    std::uint64_t seq = 0;
    enum class Kind { scenario, frame, replay_fire, dummy_emit } kind = Kind::scenario;
    std::size_t scenario_index = 0;      // scenario
    std::size_t to = 0;                  // frame
    std::size_t from = 0;                // frame / replay_fire / dummy_emit
    Bytes frame;                         // frame / replay_fire
    bool replayed = false;               // frame arrived via a replay re-broadcast
};

struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

struct SimNode {
    NodeSpec spec;
    std::unique_ptr<RelayNode> node;
    bool active = true;
    Rng rng{0};
    std::size_t replays_scheduled = 0;
};

class Simulation {
public:
    Simulation(const Scenario& scenario, std::uint64_t seed)
        : scenario_(scenario), master_(seed) {
        scenario.validate();
        metrics_.seed = seed;
        metrics_.suite = std::string(suite_name(scenario.suite));
        build_nodes();
        build_edges();
        for (std::size_t i = 0; i < scenario.events.size(); ++i) {
            push({scenario.events[i].at, 0, SimEvent::Kind::scenario, i, 0, 0, {}});
        }
        schedule_initial_dummies();
    }

    SimMetrics run() {
        while (!queue_.empty()) {
            SimEvent event = queue_.top();
            queue_.pop();
            if (scenario_.duration.has_value() && event.at > *scenario_.duration) break;
            now_ = std::max(now_, event.at);
            dispatch(event);
        }
        metrics_.end_time = scenario_.duration.value_or(now_);
        check_assertions();
        return std::move(metrics_);
    }

private:
    void build_nodes() {
        const CipherSuite& cipher = suite(scenario_.suite);
        std::vector<KeyPair> keys;
        keys.reserve(scenario_.nodes.size());
        for (std::size_t i = 0; i < scenario_.nodes.size(); ++i) {
            Rng key_rng = master_.fork(0x10000 + i);
            keys.push_back(cipher.generate_keypair(key_rng.seed32()));
        }
        for (std::size_t i = 0; i < scenario_.nodes.size(); ++i) {
            const NodeSpec& spec = scenario_.nodes[i];
            ContactBook book(keys[i]);
            for (std::size_t j = 0; j < scenario_.nodes.size(); ++j) {
                if (j == i) continue;
                const std::string& other = scenario_.nodes[j].id;
                if (spec.known_contacts.has_value()) {
                    bool listed = false;
                    for (const std::string& c : *spec.known_contacts) listed = listed || c == other;
                    if (!listed) continue;
                }
                book.add_contact(Contact{other, keys[j].public_key, spec.id});
            }
            SimNode sim_node;
            sim_node.spec = spec;
            sim_node.node =
                std::make_unique<RelayNode>(spec.config, std::move(book), scenario_.suite);
            sim_node.rng = master_.fork(0x20000 + i);
            nodes_.push_back(std::move(sim_node));
        }
    }

    void build_edges() {
        for (std::size_t e = 0; e < scenario_.edges.size(); ++e) {
            const EdgeSpec& edge = scenario_.edges[e];
            std::size_t a = *scenario_.node_index(edge.a);
            std::size_t b = *scenario_.node_index(edge.b);
            edge_index_[key(a, b)] = e;
            edge_up_.push_back(true);
        }
        refresh_neighbors();
    }

    static std::uint64_t key(std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    bool link_usable(std::size_t a, std::size_t b) const {
        auto it = edge_index_.find(key(a, b));
        if (it == edge_index_.end()) return false;
        return edge_up_[it->second] && nodes_[a].active && nodes_[b].active;
    }

    void refresh_neighbors() {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            std::vector<LinkId> links;
            for (std::size_t j = 0; j < nodes_.size(); ++j) {
                if (i != j && link_usable(i, j)) links.push_back(j);
            }
            nodes_[i].node->set_neighbors(std::move(links));
        }
    }

    Duration sample_latency(std::size_t a, std::size_t b) {
        const EdgeSpec& edge = scenario_.edges[edge_index_.at(key(a, b))];
        if (edge.latency_min == edge.latency_max) return edge.latency_min;
        return master_.range(edge.latency_min, edge.latency_max);
    }

    void push(SimEvent event) {
        event.seq = next_seq_++;
        queue_.push(std::move(event));
    }

    void schedule_initial_dummies() {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            double rate = nodes_[i].spec.config.dummy_rate_per_s;
            if (rate <= 0.0) continue;
            Duration delay = nodes_[i].rng.exp_interval(1e6 / rate);
            push({delay, 0, SimEvent::Kind::dummy_emit, 0, 0, i, {}});
        }
    }

    std::size_t register_message(bool is_dummy, const std::string& from, const std::string& to,
                                 const Hash64& hash, Bytes plaintext) {
        MessageStat stat;
        stat.is_dummy = is_dummy;
        stat.from = from;
        stat.to = to;
        stat.hash = hash;
        stat.plaintext = std::move(plaintext);
        stat.sent_at = now_;
        metrics_.messages.push_back(std::move(stat));
        std::size_t index = metrics_.messages.size() - 1;
        by_hash_[hash] = index;
        return index;
    }

    // One transmission per (frame, link); latency applies per link,
    // the relay delay was already added by the caller.
    void transmit(std::size_t from, std::size_t to, const Bytes& frame, Duration extra_delay,
                  std::size_t msg_index, bool replayed = false) {
        metrics_.transmissions += 1;
        if (msg_index != kNoMessage) metrics_.messages[msg_index].transmissions += 1;
        Duration latency = sample_latency(from, to);
        push({now_ + extra_delay + latency, 0, SimEvent::Kind::frame, 0, to, from, frame,
              replayed});
    }

    void fan_out(std::size_t node_index, std::optional<LinkId> arrival, const Bytes& frame,
                 std::size_t msg_index, bool apply_relay_delay) {
        SimNode& sim_node = nodes_[node_index];
        Duration delay = 0;
        if (apply_relay_delay && sim_node.spec.config.relay_delay_max > 0) {
            delay = master_.below(sim_node.spec.config.relay_delay_max + 1);
        }
        for (LinkId target : sim_node.node->relay_targets(arrival)) {
            transmit(node_index, static_cast<std::size_t>(target), frame, delay, msg_index);
        }
    }

    void dispatch(const SimEvent& event) {
        switch (event.kind) {
            case SimEvent::Kind::scenario: on_scenario(scenario_.events[event.scenario_index]); break;
            case SimEvent::Kind::frame: on_frame(event); break;
            case SimEvent::Kind::replay_fire: on_replay_fire(event); break;
            case SimEvent::Kind::dummy_emit: on_dummy_emit(event); break;
        }
    }

    void on_scenario(const ScenarioEvent& event) {
        if (const auto* send = std::get_if<SendEvent>(&event.action)) {
            on_send(*send);
        } else if (const auto* link = std::get_if<LinkChange>(&event.action)) {
            std::size_t a = *scenario_.node_index(link->a);
            std::size_t b = *scenario_.node_index(link->b);
            edge_up_[edge_index_.at(key(a, b))] = link->up;
            refresh_neighbors();
        } else if (const auto* change = std::get_if<NodeChange>(&event.action)) {
            nodes_[*scenario_.node_index(change->id)].active = change->join;
            refresh_neighbors();
        }
    }

    void on_send(const SendEvent& send) {
        std::size_t from = *scenario_.node_index(send.from);
        SimNode& sender = nodes_[from];
        std::size_t msg_index = kNoMessage;
        if (!sender.active) {
            msg_index = register_message(false, send.from, send.to, Hash64{}, send.message);
            metrics_.assertion_failures.push_back("send from inactive node " + send.from);
            return;
        }
        Bytes wire = sender.node->originate(send.to, send.internal_address,
                                            as_span(send.message), now_);
        EncodedMessage parsed = parse_message(as_span(wire));
        msg_index = register_message(false, send.from, send.to, parsed.hash, send.message);
        metrics_.relay_count[send.from] += 1;
        metrics_.messages[msg_index].relays[send.from] += 1;
        fan_out(from, std::nullopt, wire, msg_index, false);
    }

    void on_frame(const SimEvent& event) {
        SimNode& sim_node = nodes_[event.to];
        if (!sim_node.active) {
            metrics_.frames_to_inactive += 1;
            return;
        }
        const std::string& node_id = sim_node.spec.id;
        const std::string& from_id = nodes_[event.from].spec.id;

        if (sim_node.spec.role == NodeRole::observer) {
            metrics_.observer_logs[node_id].push_back(
                ObserverFrame{now_, from_id + "->" + node_id, event.frame});
        }

        ReceiveResult result = sim_node.node->on_receive(as_span(event.frame), now_);

        std::size_t msg_index = kNoMessage;
        if (result.message_hash.has_value()) {
            auto it = by_hash_.find(*result.message_hash);
            if (it != by_hash_.end()) msg_index = it->second;
        }

        ReceiveRecord record;
        record.at = now_;
        record.node = node_id;
        record.from = from_id;
        record.via_replay = event.replayed;
        record.relayed = result.decision.relay;
        record.drop = result.decision.drop_reason;
        if (result.outcome.has_value()) {
            record.outcome = result.outcome->kind;
            record.reject = result.outcome->reject;
        }
        record.message_index = msg_index == kNoMessage ? -1 : static_cast<int>(msg_index);
        metrics_.receive_log.push_back(record);

        if (result.decision.drop_reason == DropReason::duplicate) metrics_.duplicate_drops += 1;

        MessageStat* stat = msg_index == kNoMessage ? nullptr : &metrics_.messages[msg_index];
        if (result.outcome.has_value() && stat != nullptr) {
            stat->outcome_counts[outcome_name(result.outcome->kind)] += 1;
            if (result.outcome->kind == DecodeOutcome::Kind::rejected) {
                stat->outcome_counts[reject_reason_name(*result.outcome->reject)] += 1;
            }
            if (result.outcome->kind == DecodeOutcome::Kind::delivered) {
                metrics_.deliveries += 1;
                if (!stat->delivered) {
                    stat->delivered = true;
                    stat->delivered_at = now_;
                    stat->delivered_message = result.outcome->result->message;
                    stat->delivered_alias = result.outcome->result->sender_alias;
                    stat->delivered_authenticity = result.outcome->result->authenticity;
                }
            }
        }

        if (result.decision.relay) {
            bool forwards = sim_node.spec.role != NodeRole::dropper;
            if (forwards) {
                metrics_.relay_count[node_id] += 1;
                if (stat != nullptr) stat->relays[node_id] += 1;
                fan_out(event.to, event.from, event.frame, msg_index, true);
            }
            if (sim_node.spec.role == NodeRole::replayer) {
                for (Duration delay : sim_node.spec.replay_delays) {
                    push({now_ + delay, 0, SimEvent::Kind::replay_fire, 0, 0, event.to,
                          event.frame});
                }
            }
        }
    }

    void on_replay_fire(const SimEvent& event) {
        SimNode& sim_node = nodes_[event.from];
        if (!sim_node.active) return;
        std::size_t msg_index = kNoMessage;
        EncodedMessage parsed = parse_message(as_span(event.frame));
        auto it = by_hash_.find(parsed.hash);
        if (it != by_hash_.end()) msg_index = it->second;
        for (LinkId target : sim_node.node->relay_targets(std::nullopt)) {
            transmit(event.from, static_cast<std::size_t>(target), event.frame, 0, msg_index,
                     true);
        }
    }

    void on_dummy_emit(const SimEvent& event) {
        SimNode& sim_node = nodes_[event.from];
        double rate = sim_node.spec.config.dummy_rate_per_s;
        if (rate <= 0.0) return;
        if (sim_node.active) {
            EncodedMessage dummy = sim_node.node->make_dummy(now_, sim_node.rng);
            sim_node.node->seen_store().insert(dummy.hash, now_);
            Bytes wire = serialize_message(dummy);
            std::size_t msg_index =
                register_message(true, sim_node.spec.id, "", dummy.hash, {});
            metrics_.dummy_count += 1;
            metrics_.relay_count[sim_node.spec.id] += 1;
            metrics_.messages[msg_index].relays[sim_node.spec.id] += 1;
            fan_out(event.from, std::nullopt, wire, msg_index, false);
        }
        Duration next = sim_node.rng.exp_interval(1e6 / rate);
        push({now_ + next, 0, SimEvent::Kind::dummy_emit, 0, 0, event.from, {}});
    }

    void check_assertions() {
        const ScenarioAssertions& a = scenario_.assertions;
        if (a.all_delivered.value_or(false)) {
            for (const MessageStat& m : metrics_.messages) {
                if (!m.is_dummy && !m.delivered) {
                    metrics_.assertion_failures.push_back(
                        "message " + m.from + "->" + m.to + " not delivered");
                }
            }
        }
        if (a.max_transmissions_per_message.has_value()) {
            for (const MessageStat& m : metrics_.messages) {
                if (m.transmissions > *a.max_transmissions_per_message) {
                    metrics_.assertion_failures.push_back(
                        "message " + m.from + " transmissions " + std::to_string(m.transmissions) +
                        " > " + std::to_string(*a.max_transmissions_per_message));
                }
            }
        }
        metrics_.assertions_passed = metrics_.assertion_failures.empty();
    }

    static constexpr std::size_t kNoMessage = static_cast<std::size_t>(-1);

    const Scenario& scenario_;
    Rng master_;
    SimMetrics metrics_;
    std::vector<SimNode> nodes_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
    std::vector<bool> edge_up_;
    std::unordered_map<Hash64, std::size_t, Hash64Key> by_hash_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, EventOrder> queue_;
    std::uint64_t next_seq_ = 0;
    Timestamp now_ = 0;
};

}  // namespace

SimMetrics run_simulation(const Scenario& scenario) {
    return Simulation(scenario, scenario.seed).run();
}

SimMetrics run_simulation(const Scenario& scenario, std::uint64_t seed_override) {
    return Simulation(scenario, seed_override).run();
}

std::string metrics_to_json(const SimMetrics& metrics, bool include_receive_log) {
    nlohmann::ordered_json doc;
    doc["seed"] = metrics.seed;
    doc["suite"] = metrics.suite;
    doc["end_time_us"] = metrics.end_time;
    doc["totals"] = {
        {"transmissions", metrics.transmissions},
        {"duplicate_drops", metrics.duplicate_drops},
        {"deliveries", metrics.deliveries},
        {"dummies", metrics.dummy_count},
        {"frames_to_inactive", metrics.frames_to_inactive},
    };
    doc["messages"] = nlohmann::ordered_json::array();
    for (const MessageStat& m : metrics.messages) {
        nlohmann::ordered_json j;
        j["kind"] = m.is_dummy ? "dummy" : "payload";
        j["from"] = m.from;
        if (!m.is_dummy) j["to"] = m.to;
        j["hash"] = to_hex(ByteSpan(m.hash.data(), 8));
        j["sent_at_us"] = m.sent_at;
        j["delivered"] = m.delivered;
        if (m.delivered) {
            j["delivered_at_us"] = m.delivered_at;
            j["latency_us"] = m.delivered_at - m.sent_at;
        }
        j["transmissions"] = m.transmissions;
        j["relays"] = m.relays;
        if (!m.outcome_counts.empty()) j["outcomes"] = m.outcome_counts;
        doc["messages"].push_back(std::move(j));
    }
    doc["relay_count"] = metrics.relay_count;
    nlohmann::ordered_json observers = nlohmann::ordered_json::object();
    for (const auto& [id, frames] : metrics.observer_logs) {
        observers[id] = {{"frames", frames.size()}};
    }
    doc["observers"] = std::move(observers);
    if (include_receive_log) {
        doc["receive_log"] = nlohmann::ordered_json::array();
        for (const ReceiveRecord& r : metrics.receive_log) {
            nlohmann::ordered_json j;
            j["at_us"] = r.at;
            j["node"] = r.node;
            j["from"] = r.from;
            j["relayed"] = r.relayed;
            if (r.drop.has_value()) j["drop"] = drop_reason_name(*r.drop);
            if (r.outcome.has_value()) j["outcome"] = outcome_name(*r.outcome);
            if (r.reject.has_value()) j["reject"] = reject_reason_name(*r.reject);
            j["message"] = r.message_index;
            doc["receive_log"].push_back(std::move(j));
        }
    }
    doc["assertions"] = {
        {"passed", metrics.assertions_passed},
        {"failures", metrics.assertion_failures},
    };
    return doc.dump(2);
}

std::string metrics_to_csv(const SimMetrics& metrics) {
    std::ostringstream out;
    out << "index,kind,from,to,hash_prefix,sent_at_us,delivered,delivered_at_us,latency_us,"
           "transmissions\n";
    for (std::size_t i = 0; i < metrics.messages.size(); ++i) {
        const MessageStat& m = metrics.messages[i];
        out << i << ',' << (m.is_dummy ? "dummy" : "payload") << ',' << m.from << ',' << m.to
            << ',' << to_hex(ByteSpan(m.hash.data(), 8)) << ',' << m.sent_at << ','
            << (m.delivered ? 1 : 0) << ',';
        if (m.delivered) {
            out << m.delivered_at << ',' << (m.delivered_at - m.sent_at);
        } else {
            out << ',';
        }
        out << ',' << m.transmissions << '\n';
    }
    return out.str();
}

}  // namespace efpix::sim

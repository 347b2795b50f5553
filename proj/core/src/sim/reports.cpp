#include "efpix/sim/reports.hpp"

#include <json.hpp>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_set>

#include "efpix/error.hpp"

namespace efpix::sim {

void Report::check(bool ok, const std::string& line) {
    if (ok) {
        checks.push_back(line);
    } else {
        failures.push_back(line);
        passed = false;
    }
}

std::string report_to_json(const Report& report) {
    nlohmann::ordered_json doc;
    doc["title"] = report.title;
    doc["passed"] = report.passed;
    doc["checks"] = report.checks;
    doc["failures"] = report.failures;
    return doc.dump(2);
}

std::string report_to_text(const Report& report) {
    std::ostringstream out;
    out << "== " << report.title << " ==\n";
    for (const std::string& line : report.checks) out << "  ok: " << line << '\n';
    for (const std::string& line : report.failures) out << "  FAIL: " << line << '\n';
    out << (report.passed ? "PASSED" : "FAILED") << '\n';
    return out.str();
}

namespace {

std::uint32_t gram_at(ByteSpan data, std::size_t i) {
    return (static_cast<std::uint32_t>(data[i]) << 24) |
           (static_cast<std::uint32_t>(data[i + 1]) << 16) |
           (static_cast<std::uint32_t>(data[i + 2]) << 8) | data[i + 3];
}

// Breadth-first reachability over the scenario's initial topology with the
// given nodes excluded. Independent of the relay machinery.
bool reachable(const Scenario& scenario, const std::string& from, const std::string& to,
               const std::set<std::string>& excluded) {
    if (excluded.contains(from) || excluded.contains(to)) return false;
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const EdgeSpec& edge : scenario.edges) {
        if (excluded.contains(edge.a) || excluded.contains(edge.b)) continue;
        adjacency[edge.a].push_back(edge.b);
        adjacency[edge.b].push_back(edge.a);
    }
    std::set<std::string> visited{from};
    std::queue<std::string> frontier;
    frontier.push(from);
    while (!frontier.empty()) {
        std::string current = frontier.front();
        frontier.pop();
        if (current == to) return true;
        for (const std::string& next : adjacency[current]) {
            if (visited.insert(next).second) frontier.push(next);
        }
    }
    return false;
}

}  // namespace

Report assert_observer_blindness(const SimMetrics& metrics, const Scenario& scenario) {
    std::size_t observers = 0;
    for (const NodeSpec& node : scenario.nodes) {
        if (node.role == NodeRole::observer) ++observers;
    }
    if (observers == 0) raise(Errc::precondition, "scenario has no observer node");
    std::set<std::pair<std::string, std::string>> pairs;
    for (const MessageStat& m : metrics.messages) {
        if (!m.is_dummy) pairs.insert({m.from, m.to});
    }
    if (pairs.size() < 2) {
        raise(Errc::precondition, "need at least two distinct sender/receiver pairs");
    }

    Report report;
    report.title = "observer blindness";

    std::size_t frame_count = 0;
    std::size_t bad_size = 0;
    std::size_t bad_layout = 0;
    for (const auto& [id, frames] : metrics.observer_logs) {
        for (const ObserverFrame& f : frames) {
            ++frame_count;
            if (f.frame.size() != kWireSize) {
                ++bad_size;
                continue;
            }
            try {
                parse_message(as_span(f.frame));
            } catch (const Error&) {
                ++bad_layout;
            }
        }
    }
    report.check(frame_count > 0, "observers captured " + std::to_string(frame_count) + " frames");
    report.check(bad_size == 0, "every observed frame is exactly 580 bytes (" +
                                    std::to_string(bad_size) + " deviations)");
    report.check(bad_layout == 0,
                 "every observed frame parses as version||hash||nonce||blob||signature (" +
                     std::to_string(bad_layout) + " deviations)");

    // 4-gram scan: a leak of any plaintext run of length >= 4 would surface
    // as one of its 4-byte windows.
    std::unordered_set<std::uint32_t> plaintext_grams;
    std::size_t scannable_messages = 0;
    for (const MessageStat& m : metrics.messages) {
        if (m.is_dummy || m.plaintext.size() < 4) continue;
        ++scannable_messages;
        for (std::size_t i = 0; i + 4 <= m.plaintext.size(); ++i) {
            plaintext_grams.insert(gram_at(as_span(m.plaintext), i));
        }
    }
    std::size_t leaks = 0;
    for (const auto& [id, frames] : metrics.observer_logs) {
        for (const ObserverFrame& f : frames) {
            if (f.frame.size() < 4) continue;
            for (std::size_t i = 0; i + 4 <= f.frame.size(); ++i) {
                if (plaintext_grams.contains(gram_at(as_span(f.frame), i))) ++leaks;
            }
        }
    }
    report.check(leaks == 0, "no plaintext 4-gram from " + std::to_string(scannable_messages) +
                                 " messages appears in any observed frame (" +
                                 std::to_string(leaks) + " hits)");

    std::set<std::size_t> observed_sizes;
    for (const auto& [id, frames] : metrics.observer_logs) {
        for (const ObserverFrame& f : frames) observed_sizes.insert(f.frame.size());
    }
    report.check(observed_sizes.size() <= 1,
                 "observed frame sizes form a single bucket (dummies indistinguishable)");
    return report;
}

Report run_replay_attack(const Scenario& scenario) {
    return run_replay_attack(scenario, scenario.seed);
}

Report run_replay_attack(const Scenario& scenario, std::uint64_t seed_override) {
    const NodeSpec* replayer = nullptr;
    for (const NodeSpec& node : scenario.nodes) {
        if (node.role == NodeRole::replayer) replayer = &node;
    }
    if (replayer == nullptr) raise(Errc::precondition, "scenario has no replayer node");
    if (replayer->replay_delays.empty()) {
        raise(Errc::precondition, "replayer has no replay_delays_us configured");
    }

    Duration min_retention = ~Duration{0};
    Duration max_retention = 0;
    Duration max_age = 0;
    for (const NodeSpec& node : scenario.nodes) {
        min_retention = std::min(min_retention, node.config.seen_retention);
        max_retention = std::max(max_retention, node.config.seen_retention);
        max_age = std::max(max_age, node.config.max_message_age);
    }

    SimMetrics metrics = run_simulation(scenario, seed_override);

    Report report;
    report.title = "replay attack";

    std::size_t replay_receives = 0;
    std::size_t in_window = 0;
    std::size_t in_window_duplicate = 0;
    std::size_t post_window = 0;
    std::size_t post_window_too_old_at_addressee = 0;
    std::size_t replay_deliveries = 0;
    for (const ReceiveRecord& r : metrics.receive_log) {
        if (!r.via_replay || r.message_index < 0) continue;
        const MessageStat& m = metrics.messages[static_cast<std::size_t>(r.message_index)];
        ++replay_receives;
        Duration age = r.at - m.sent_at;
        if (r.outcome == DecodeOutcome::Kind::delivered) ++replay_deliveries;
        if (age < min_retention) {
            ++in_window;
            if (r.drop == DropReason::duplicate) ++in_window_duplicate;
        } else if (age > max_retention && age > max_age) {
            ++post_window;
            if (r.node == m.to && r.reject == RejectReason::too_old) {
                ++post_window_too_old_at_addressee;
            }
        }
    }

    report.check(replay_receives > 0, "replayer produced " + std::to_string(replay_receives) +
                                          " replayed frame receptions");
    report.check(in_window > 0 && in_window == in_window_duplicate,
                 "all " + std::to_string(in_window) +
                     " in-window replayed receptions were DROP/DUPLICATE");
    report.check(post_window > 0,
                 "post-window replays reached nodes (" + std::to_string(post_window) + ")");
    report.check(post_window_too_old_at_addressee > 0,
                 "post-window replay was REJECTED(TOO_OLD) at the addressee");
    report.check(replay_deliveries == 0, "replays produced zero deliveries");

    for (const MessageStat& m : metrics.messages) {
        if (m.is_dummy) continue;
        std::uint64_t delivered_count = 0;
        auto it = m.outcome_counts.find("DELIVERED");
        if (it != m.outcome_counts.end()) delivered_count = it->second;
        report.check(delivered_count <= 1, "message " + m.from + "->" + m.to + " delivered " +
                                               std::to_string(delivered_count) + " times");
    }
    return report;
}

Report run_choke_point(const Scenario& scenario) {
    return run_choke_point(scenario, scenario.seed);
}

Report run_choke_point(const Scenario& scenario, std::uint64_t seed_override) {
    std::set<std::string> droppers;
    for (const NodeSpec& node : scenario.nodes) {
        if (node.role == NodeRole::dropper) droppers.insert(node.id);
    }
    if (droppers.empty()) raise(Errc::precondition, "scenario has no dropper node");

    bool has_send = false;
    for (const ScenarioEvent& event : scenario.events) {
        has_send = has_send || std::holds_alternative<SendEvent>(event.action);
    }
    if (!has_send) raise(Errc::precondition, "scenario has no send event");

    Report report;
    report.title = "choke point";

    SimMetrics with_dropper = run_simulation(scenario, seed_override);

    Scenario control = scenario;
    for (NodeSpec& node : control.nodes) {
        if (node.role == NodeRole::dropper) node.role = NodeRole::honest;
    }
    SimMetrics honest = run_simulation(control, seed_override);

    for (std::size_t i = 0; i < with_dropper.messages.size(); ++i) {
        const MessageStat& m = with_dropper.messages[i];
        if (m.is_dummy) continue;
        bool expect_with = reachable(scenario, m.from, m.to, droppers);
        bool expect_control = reachable(scenario, m.from, m.to, {});
        report.check(m.delivered == expect_with,
                     "with dropper: " + m.from + "->" + m.to + " delivered=" +
                         (m.delivered ? "true" : "false") + " expected=" +
                         (expect_with ? "true" : "false"));
        const MessageStat& hm = honest.messages[i];
        report.check(hm.delivered == expect_control,
                     "control (all honest): " + hm.from + "->" + hm.to + " delivered=" +
                         (hm.delivered ? "true" : "false") + " expected=" +
                         (expect_control ? "true" : "false"));
    }
    return report;
}

}  // namespace efpix::sim

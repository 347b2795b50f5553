#pragma once

#include "efpix/sim/simulator.hpp"

namespace efpix::sim {

struct Report {
    std::string title;
    bool passed = true;
    std::vector<std::string> checks;    // one line per satisfied check
    std::vector<std::string> failures;  // one line per violated check

    void check(bool ok, const std::string& line);
};

std::string report_to_json(const Report& report);
std::string report_to_text(const Report& report);

// Every observed frame is exactly 580 bytes with the fixed field layout, and
// no 4+ byte run of any sent plaintext shows up in any observed frame.
// Requires at least one observer and two distinct sender/receiver pairs.
Report assert_observer_blindness(const SimMetrics& metrics, const Scenario& scenario);

// Runs the scenario and verifies both halves of the replay defense: in-window
// replays cause only DUPLICATE drops and no extra delivery; post-window
// replays (hash evicted, age exceeded) end in REJECTED(TOO_OLD) and no
// delivery. The scenario must contain a replayer with configured delays and
// at least one send.
Report run_replay_attack(const Scenario& scenario);
Report run_replay_attack(const Scenario& scenario, std::uint64_t seed_override);

// Runs the scenario as given, then a control run with every dropper turned
// honest, and compares delivery against reachability computed independently
// of the relay pipeline.
Report run_choke_point(const Scenario& scenario);
Report run_choke_point(const Scenario& scenario, std::uint64_t seed_override);

}  // namespace efpix::sim

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <thread>

#include "efpix/codec.hpp"
#include "efpix/crypto/pow.hpp"
#include "efpix/crypto/suite.hpp"
#include "efpix/error.hpp"
#include "efpix/identity.hpp"
#include "efpix/net/daemon.hpp"
#include "efpix/net/framing.hpp"
#include "efpix/relay.hpp"
#include "efpix/sim/reports.hpp"
#include "efpix/sim/simulator.hpp"

namespace {

using namespace efpix;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::not_found, "cannot read " + path);
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteSpan data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) raise(Errc::io_error, "short write to " + path);
}

void write_text(const std::string& path, const std::string& text) {
    write_file(path, str_span(text));
}

std::string keystore_path_or_env(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = std::getenv("EFPIX_KEYSTORE");
    if (env != nullptr && *env != '\0') return env;
    raise(Errc::config_error, "no keystore path (use --keystore or EFPIX_KEYSTORE)");
}

int cmd_keygen(const std::string& out_path, const std::string& pub_path,
               const std::string& suite_str, const std::string& seed_hex) {
    CipherSuiteId id = suite_from_name(suite_str);
    std::optional<Seed32> seed;
    if (!seed_hex.empty()) {
        Bytes raw = from_hex(seed_hex);
        if (raw.size() != 32) raise(Errc::config_error, "--seed-hex must be 32 bytes of hex");
        seed = take_array<32>(as_span(raw));
    } else if (id == CipherSuiteId::mock_fixed_size) {
        std::random_device rd;
        Seed32 s{};
        for (auto& b : s) b = static_cast<std::uint8_t>(rd());
        seed = s;
    }
    ContactBook book(suite(id).generate_keypair(seed));
    save_book(book, out_path);
    if (!pub_path.empty()) write_file(pub_path, as_span(book.own_keypair().public_key));
    nlohmann::ordered_json line{{"type", "keygen"},
                                {"keystore", out_path},
                                {"suite", std::string(suite_name(id))},
                                {"public_key_bytes", book.own_keypair().public_key.size()}};
    std::cout << line.dump() << '\n';
    return 0;
}

int cmd_contact_add(const std::string& keystore, const std::string& alias,
                    const std::string& key_file, const std::string& my_alias, bool replace) {
    ContactBook book = load_book(keystore);
    book.add_contact(Contact{alias, read_file(key_file), my_alias}, replace);
    save_book(book, keystore);
    std::cout << nlohmann::ordered_json{{"type", "contact_added"}, {"alias", alias}}.dump()
              << '\n';
    return 0;
}

int cmd_contact_list(const std::string& keystore) {
    ContactBook book = load_book(keystore);
    for (const Contact& c : book.contacts()) {
        nlohmann::ordered_json line{{"alias", c.their_alias},
                                    {"my_alias", c.my_alias_for_them},
                                    {"public_key_bytes", c.their_public_key.size()}};
        std::cout << line.dump() << '\n';
    }
    return 0;
}

int cmd_send(const std::string& keystore, const std::string& to, std::uint32_t addr,
             const std::string& message, const std::string& message_file,
             const std::string& out_path, const std::string& peer, std::uint32_t difficulty,
             std::uint64_t created_at_us) {
    if (out_path.empty() && peer.empty()) {
        raise(Errc::config_error, "send needs --out and/or --peer");
    }
    Bytes payload;
    if (!message_file.empty()) {
        payload = read_file(message_file);
    } else {
        payload.assign(message.begin(), message.end());
    }
    ContactBook book = load_book(keystore);
    PowParams pow{difficulty};
    Timestamp created = created_at_us != 0 ? created_at_us : net::wall_clock_us();
    EncodedMessage encoded = create_message(suite(book.own_keypair().suite), book, to, addr,
                                            as_span(payload), created, pow);
    Bytes wire = serialize_message(encoded);
    if (!out_path.empty()) write_file(out_path, as_span(wire));
    if (!peer.empty()) {
        auto [host, port] = net::split_host_port(peer);
        net::Socket sock = net::connect_tcp(host, port);
        net::write_frame(sock.fd(), as_span(wire));
    }
    nlohmann::ordered_json line{{"type", "sent"},
                                {"to", to},
                                {"bytes", wire.size()},
                                {"hash", to_hex(ByteSpan(encoded.hash.data(), 8))},
                                {"created_at_us", created}};
    std::cout << line.dump() << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& keystore_flag) {
    net::DaemonConfig config = net::load_daemon_config(config_path);
    std::string keystore = !keystore_flag.empty() ? keystore_flag : config.keystore_path;
    ContactBook book = load_book(keystore_path_or_env(keystore));

    net::Daemon daemon(config, std::move(book), std::cout);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    daemon.start();
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    daemon.stop();
    return 0;
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_path, const std::string& csv_path, bool receive_log,
                 bool observer_report, bool replay_report, bool choke_report) {
    sim::Scenario scenario = sim::load_scenario(scenario_path);
    if (seed_set) scenario.seed = seed;

    bool failed = false;
    sim::SimMetrics metrics = sim::run_simulation(scenario);
    std::string json = sim::metrics_to_json(metrics, receive_log);
    if (!out_path.empty()) {
        write_text(out_path, json + "\n");
    } else {
        std::cout << json << '\n';
    }
    if (!csv_path.empty()) write_text(csv_path, sim::metrics_to_csv(metrics));
    failed = failed || !metrics.assertions_passed;

    if (observer_report) {
        sim::Report report = sim::assert_observer_blindness(metrics, scenario);
        std::cout << sim::report_to_text(report);
        failed = failed || !report.passed;
    }
    if (replay_report) {
        sim::Report report = sim::run_replay_attack(scenario);
        std::cout << sim::report_to_text(report);
        failed = failed || !report.passed;
    }
    if (choke_report) {
        sim::Report report = sim::run_choke_point(scenario);
        std::cout << sim::report_to_text(report);
        failed = failed || !report.passed;
    }
    return failed ? 2 : 0;
}

int cmd_inspect(const std::string& frame_path, std::uint32_t difficulty) {
    Bytes wire = read_file(frame_path);
    nlohmann::ordered_json line{{"type", "inspect"}, {"file", frame_path}, {"bytes", wire.size()}};
    EncodedMessage message;
    try {
        message = parse_message(as_span(wire));
    } catch (const Error& e) {
        line["error"] = e.what();
        std::cout << line.dump() << '\n';
        return 2;
    }
    line["version"] = message.version;
    line["hash"] = to_hex(as_span(message.hash));
    line["nonce"] = to_hex(as_span(message.nonce));
    bool hash_valid = hash_message(message.encrypted_blob, message.signature) == message.hash;
    bool pow_valid = pow_check(message.hash, message.nonce, PowParams{difficulty});
    line["hash_valid"] = hash_valid;
    line["pow_valid"] = pow_valid;
    line["pow_difficulty_bits"] = difficulty;
    std::cout << line.dump() << '\n';
    return hash_valid && pow_valid ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EFPIX encrypted flood relay"};
    app.require_subcommand(1);

    // keygen
    std::string kg_out, kg_pub, kg_suite = "reference", kg_seed;
    CLI::App* keygen = app.add_subcommand("keygen", "create a keystore with a fresh key pair");
    keygen->add_option("--out", kg_out, "keystore path")->required();
    keygen->add_option("--pub", kg_pub, "also write the raw public key blob here");
    keygen->add_option("--suite", kg_suite, "reference|mock");
    keygen->add_option("--seed-hex", kg_seed, "32-byte hex seed (required entropy for mock)");

    // contact add / list
    std::string ct_ks, ct_alias, ct_key, ct_my;
    bool ct_replace = false;
    CLI::App* contact = app.add_subcommand("contact", "manage the contact book");
    contact->require_subcommand(1);
    CLI::App* contact_add = contact->add_subcommand("add", "add a contact");
    contact_add->add_option("--keystore", ct_ks, "keystore path");
    contact_add->add_option("--alias", ct_alias, "their alias")->required();
    contact_add->add_option("--key", ct_key, "file with their public key blob")->required();
    contact_add->add_option("--my-alias", ct_my, "alias I use towards them")->required();
    contact_add->add_flag("--replace", ct_replace, "replace an existing entry");
    CLI::App* contact_list = contact->add_subcommand("list", "list contacts");
    contact_list->add_option("--keystore", ct_ks, "keystore path");

    // send
    std::string sd_ks, sd_to, sd_msg, sd_msg_file, sd_out, sd_peer;
    std::uint32_t sd_addr = 0, sd_diff = 16;
    std::uint64_t sd_created = 0;
    CLI::App* send = app.add_subcommand("send", "encode a message and write/inject it");
    send->add_option("--keystore", sd_ks, "keystore path");
    send->add_option("--to", sd_to, "recipient alias")->required();
    send->add_option("--addr", sd_addr, "internal address (u32)");
    send->add_option("--message", sd_msg, "message text");
    send->add_option("--message-file", sd_msg_file, "message from file");
    send->add_option("--out", sd_out, "write the 580-byte frame here");
    send->add_option("--peer", sd_peer, "host:port of a daemon to hand the frame to");
    send->add_option("--difficulty", sd_diff, "PoW difficulty bits");
    send->add_option("--created-at-us", sd_created, "override creation timestamp");

    // run
    std::string rn_config, rn_ks;
    CLI::App* run = app.add_subcommand("run", "run the relay daemon");
    run->add_option("--config", rn_config, "daemon config JSON")->required();
    run->add_option("--keystore", rn_ks, "keystore path override");

    // simulate
    std::string sm_scenario, sm_out, sm_csv;
    std::uint64_t sm_seed = 0;
    bool sm_receive_log = false, sm_obs = false, sm_replay = false, sm_choke = false;
    CLI::App* simulate = app.add_subcommand("simulate", "run a scenario deterministically");
    simulate->add_option("--scenario", sm_scenario, "scenario JSON")->required();
    CLI::Option* seed_opt = simulate->add_option("--seed", sm_seed, "seed override");
    simulate->add_option("--out", sm_out, "metrics JSON path (default stdout)");
    simulate->add_option("--csv", sm_csv, "metrics CSV path");
    simulate->add_flag("--receive-log", sm_receive_log, "include the receive log in the JSON");
    simulate->add_flag("--observer-report", sm_obs, "run the observer blindness checks");
    simulate->add_flag("--replay-report", sm_replay, "run the replay attack checks");
    simulate->add_flag("--choke-report", sm_choke, "run the choke point checks");

    // inspect
    std::string in_file;
    std::uint32_t in_diff = 16;
    CLI::App* inspect = app.add_subcommand("inspect", "examine a frame without decrypting");
    inspect->add_option("file", in_file, "frame file (raw 580 bytes)")->required();
    inspect->add_option("--difficulty", in_diff, "PoW difficulty bits to check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (keygen->parsed()) return cmd_keygen(kg_out, kg_pub, kg_suite, kg_seed);
        if (contact->parsed()) {
            std::string ks = keystore_path_or_env(ct_ks);
            if (contact_add->parsed()) {
                return cmd_contact_add(ks, ct_alias, ct_key, ct_my, ct_replace);
            }
            return cmd_contact_list(ks);
        }
        if (send->parsed()) {
            return cmd_send(keystore_path_or_env(sd_ks), sd_to, sd_addr, sd_msg, sd_msg_file,
                            sd_out, sd_peer, sd_diff, sd_created);
        }
        if (run->parsed()) return cmd_run(rn_config, rn_ks);
        if (simulate->parsed()) {
            return cmd_simulate(sm_scenario, sm_seed, !seed_opt->empty(), sm_out, sm_csv,
                                sm_receive_log, sm_obs, sm_replay, sm_choke);
        }
        if (inspect->parsed()) return cmd_inspect(in_file, in_diff);
    } catch (const Error& e) {
        std::cerr << nlohmann::ordered_json{{"error", e.what()},
                                            {"code", errc_name(e.code())}}
                         .dump()
                  << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::ordered_json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}

#include "efpix/net/daemon.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <random>

#include "efpix/error.hpp"

namespace efpix::net {

Timestamp wall_clock_us() {
    return static_cast<Timestamp>(std::chrono::duration_cast<std::chrono::microseconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count());
}

void DaemonConfig::validate() const {
    node.validate();
    if (listen_port < 0 && peers.empty()) {
        raise(Errc::config_error, "daemon needs a listen address or at least one peer");
    }
    if (listen_port > 65535) raise(Errc::config_error, "listen port out of range");
    for (const std::string& peer : peers) {
        if (split_host_port(peer).second == 0) {
            raise(Errc::config_error, "peer '" + peer + "' needs a concrete port");
        }
    }
}

DaemonConfig daemon_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        raise(Errc::config_error, std::string("daemon config JSON: ") + e.what());
    }
    try {
        DaemonConfig config;
        if (doc.contains("listen")) {
            auto [host, port] = split_host_port(doc.at("listen").get<std::string>());
            config.listen_host = host;
            config.listen_port = port;
        } else if (doc.contains("listen_port")) {
            config.listen_port = doc.at("listen_port").get<int>();
        }
        if (doc.contains("peers")) config.peers = doc.at("peers").get<std::vector<std::string>>();
        if (doc.contains("keystore")) config.keystore_path = doc.at("keystore").get<std::string>();
        if (doc.contains("pow_difficulty_bits")) {
            config.node.pow.difficulty_bits = doc.at("pow_difficulty_bits").get<std::uint32_t>();
        }
        if (doc.contains("max_message_age_ms")) {
            config.node.max_message_age = doc.at("max_message_age_ms").get<Duration>() * 1000;
        }
        if (doc.contains("future_skew_ms")) {
            config.node.future_skew_tolerance = doc.at("future_skew_ms").get<Duration>() * 1000;
        }
        if (doc.contains("seen_capacity")) {
            config.node.seen_capacity = doc.at("seen_capacity").get<std::size_t>();
        }
        if (doc.contains("seen_retention_ms")) {
            config.node.seen_retention = doc.at("seen_retention_ms").get<Duration>() * 1000;
        }
        if (doc.contains("relay_delay_max_ms")) {
            config.node.relay_delay_max = doc.at("relay_delay_max_ms").get<Duration>() * 1000;
        } else {
            config.node.relay_delay_max = 500'000;
        }
        if (doc.contains("dummy_rate_per_s")) {
            config.node.dummy_rate_per_s = doc.at("dummy_rate_per_s").get<double>();
        }
        if (doc.contains("echo_suppression")) {
            config.node.echo_suppression = doc.at("echo_suppression").get<bool>();
        }
        if (doc.contains("outbox_capacity")) {
            config.outbox_capacity = doc.at("outbox_capacity").get<std::size_t>();
        }
        config.validate();
        return config;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        raise(Errc::config_error, std::string("daemon config: ") + e.what());
    }
}

DaemonConfig load_daemon_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::not_found, "daemon config " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return daemon_config_from_json(text);
}

namespace {
std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
           static_cast<std::uint64_t>(wall_clock_us());
}

RelayNode make_node(const NodeConfig& config, ContactBook book) {
    CipherSuiteId suite_id = book.own_keypair().suite;
    return RelayNode(config, std::move(book), suite_id);
}
}  // namespace

Daemon::Daemon(DaemonConfig config, ContactBook book, std::ostream& events)
    : config_(std::move(config)),
      events_(events),
      node_(make_node(config_.node, std::move(book))),
      rng_(entropy_seed()) {
    config_.validate();
}

Daemon::~Daemon() { stop(); }

void Daemon::start() {
    if (running_.exchange(true)) return;
    if (config_.listen_port >= 0) {
        listener_ = listen_tcp(config_.listen_host, static_cast<std::uint16_t>(config_.listen_port),
                               &bound_port_);
        accept_thread_ = std::thread(&Daemon::accept_loop, this);
    }
    for (const std::string& peer : config_.peers) {
        dial_threads_.emplace_back(&Daemon::dial_peer, this, peer);
    }
    if (config_.node.relay_delay_max > 0) {
        scheduler_thread_ = std::thread(&Daemon::scheduler_loop, this);
    }
    if (config_.node.dummy_rate_per_s > 0.0) {
        dummy_thread_ = std::thread(&Daemon::dummy_loop, this);
    }
    {
        std::lock_guard lock(events_mutex_);
        nlohmann::ordered_json line{{"type", "ready"}};
        if (config_.listen_port >= 0) line["port"] = bound_port_;
        events_ << line.dump() << '\n' << std::flush;
    }
}

void Daemon::stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown();
    listener_.close();
    scheduler_wake_.notify_all();

    // No new connections can appear once the acceptor and dialers are joined.
    if (accept_thread_.joinable()) accept_thread_.join();
    for (std::thread& t : dial_threads_) {
        if (t.joinable()) t.join();
    }
    dial_threads_.clear();
    if (scheduler_thread_.joinable()) scheduler_thread_.join();
    if (dummy_thread_.joinable()) dummy_thread_.join();

    std::vector<std::shared_ptr<Peer>> reap;
    {
        std::lock_guard lock(peers_mutex_);
        for (auto& [link, peer] : peers_) dead_peers_.push_back(peer);
        peers_.clear();
        reap.swap(dead_peers_);
    }
    for (auto& peer : reap) {
        peer->open = false;
        peer->socket.shutdown();
        peer->wake.notify_all();
        if (peer->reader.joinable()) peer->reader.join();
        if (peer->writer.joinable()) peer->writer.join();
        peer->socket.close();
    }
}

std::size_t Daemon::connection_count() {
    std::lock_guard lock(peers_mutex_);
    return peers_.size();
}

void Daemon::accept_loop() {
    while (running_) {
        Socket socket = accept_tcp(listener_);
        if (!socket.valid()) break;
        if (!running_) break;
        add_connection(std::move(socket));
    }
}

void Daemon::dial_peer(std::string spec) {
    auto [host, port] = split_host_port(spec);
    for (std::uint32_t attempt = 0; running_ && attempt < config_.dial_attempts; ++attempt) {
        try {
            Socket socket = connect_tcp(host, port);
            add_connection(std::move(socket));
            return;
        } catch (const Error&) {
            std::this_thread::sleep_for(std::chrono::microseconds(config_.dial_retry_interval));
        }
    }
}

void Daemon::add_connection(Socket socket) {
    if (!running_) return;  // socket closes via RAII
    auto peer = std::make_shared<Peer>();
    peer->socket = std::move(socket);
    {
        std::lock_guard lock(peers_mutex_);
        peer->link = next_link_++;
        peers_[peer->link] = peer;
    }
    {
        std::lock_guard lock(node_mutex_);
        refresh_neighbors_locked();
    }
    peer->reader = std::thread(&Daemon::reader_loop, this, peer);
    peer->writer = std::thread(&Daemon::writer_loop, this, peer);
}

void Daemon::refresh_neighbors_locked() {
    std::vector<LinkId> links;
    {
        std::lock_guard lock(peers_mutex_);
        for (const auto& [link, peer] : peers_) {
            if (peer->open) links.push_back(link);
        }
    }
    node_.set_neighbors(std::move(links));
}

void Daemon::reader_loop(std::shared_ptr<Peer> peer) {
    while (running_ && peer->open) {
        std::optional<Bytes> frame;
        try {
            frame = read_frame(peer->socket.fd());
        } catch (const Error&) {
            break;  // protocol violation or I/O error: this connection is done
        }
        if (!frame.has_value()) break;
        handle_frame(as_span(*frame), peer->link);
    }
    drop_connection(peer->link);
}

void Daemon::writer_loop(std::shared_ptr<Peer> peer) {
    while (peer->open) {
        Bytes frame;
        {
            std::unique_lock lock(peer->mutex);
            peer->wake.wait(lock, [&] { return !peer->outbox.empty() || !peer->open; });
            if (!peer->open && peer->outbox.empty()) break;
            frame = std::move(peer->outbox.front());
            peer->outbox.pop_front();
        }
        try {
            write_frame(peer->socket.fd(), as_span(frame));
        } catch (const Error&) {
            break;
        }
    }
}

void Daemon::enqueue(const std::shared_ptr<Peer>& peer, const Bytes& frame) {
    std::lock_guard lock(peer->mutex);
    if (peer->outbox.size() >= config_.outbox_capacity) {
        dropped_outbox_ += 1;
        return;
    }
    peer->outbox.push_back(frame);
    peer->wake.notify_one();
}

void Daemon::drop_connection(LinkId link) {
    std::shared_ptr<Peer> peer;
    {
        std::lock_guard lock(peers_mutex_);
        auto it = peers_.find(link);
        if (it == peers_.end()) return;  // already dropped, e.g. by stop()
        peer = it->second;
        peers_.erase(it);
        dead_peers_.push_back(peer);  // threads reaped later in stop()
    }
    peer->open = false;
    peer->socket.shutdown();
    peer->wake.notify_all();
    if (running_) {
        std::lock_guard lock(node_mutex_);
        refresh_neighbors_locked();
    }
}

void Daemon::handle_frame(ByteSpan frame, std::optional<LinkId> arrival) {
    ReceiveResult result;
    {
        std::lock_guard lock(node_mutex_);
        result = node_.on_receive(frame, wall_clock_us());
    }
    if (result.decision.relay) {
        Bytes copy(frame.begin(), frame.end());
        if (config_.node.relay_delay_max > 0) {
            Duration delay = rng_.below(config_.node.relay_delay_max + 1);
            std::lock_guard lock(scheduler_mutex_);
            scheduled_.emplace(wall_clock_us() + delay, std::make_pair(std::move(copy), arrival));
            scheduler_wake_.notify_one();
        } else {
            relay_frame(copy, arrival);
        }
    }
    if (result.outcome.has_value() && result.outcome->kind == DecodeOutcome::Kind::delivered) {
        delivered_ += 1;
        emit_delivered(*result.outcome->result);
    }
}

void Daemon::relay_frame(const Bytes& frame, std::optional<LinkId> arrival) {
    std::vector<LinkId> targets;
    {
        std::lock_guard lock(node_mutex_);
        targets = node_.relay_targets(arrival);
    }
    std::vector<std::shared_ptr<Peer>> out;
    {
        std::lock_guard lock(peers_mutex_);
        for (LinkId link : targets) {
            auto it = peers_.find(link);
            if (it != peers_.end() && it->second->open) out.push_back(it->second);
        }
    }
    for (const auto& peer : out) enqueue(peer, frame);
}

void Daemon::scheduler_loop() {
    std::unique_lock lock(scheduler_mutex_);
    while (running_) {
        if (scheduled_.empty()) {
            scheduler_wake_.wait(lock, [&] { return !scheduled_.empty() || !running_; });
            continue;
        }
        Timestamp due = scheduled_.begin()->first;
        Timestamp now = wall_clock_us();
        if (due > now) {
            scheduler_wake_.wait_for(lock, std::chrono::microseconds(due - now));
            continue;
        }
        auto [frame, arrival] = std::move(scheduled_.begin()->second);
        scheduled_.erase(scheduled_.begin());
        lock.unlock();
        relay_frame(frame, arrival);
        lock.lock();
    }
}

void Daemon::dummy_loop() {
    double mean_us = 1e6 / config_.node.dummy_rate_per_s;
    while (running_) {
        Duration wait = rng_.exp_interval(mean_us);
        while (running_ && wait > 0) {
            Duration slice = std::min<Duration>(wait, 50'000);
            std::this_thread::sleep_for(std::chrono::microseconds(slice));
            wait -= slice;
        }
        if (!running_) break;
        Bytes wire;
        {
            std::lock_guard lock(node_mutex_);
            EncodedMessage dummy = node_.make_dummy(wall_clock_us(), rng_);
            node_.seen_store().insert(dummy.hash, wall_clock_us());
            wire = serialize_message(dummy);
        }
        relay_frame(wire, std::nullopt);
    }
}

void Daemon::inject(ByteSpan frame, std::optional<LinkId> arrival) {
    handle_frame(frame, arrival);
}

void Daemon::emit_delivered(const DecodedResult& result) {
    nlohmann::ordered_json line;
    line["type"] = "delivered";
    line["received_at_us"] = result.received_at;
    line["created_at_us"] = result.created_at;
    line["sender_alias"] = result.sender_alias;
    line["authenticity"] =
        result.authenticity == Authenticity::verified ? "verified" : "anonymous";
    line["internal_address"] = result.internal_address;
    bool printable = true;
    for (std::uint8_t b : result.message) printable = printable && b >= 0x20 && b < 0x7f;
    if (printable) {
        line["message"] = std::string(result.message.begin(), result.message.end());
    }
    line["message_hex"] = to_hex(as_span(result.message));
    std::lock_guard lock(events_mutex_);
    events_ << line.dump() << '\n' << std::flush;
}

}  // namespace efpix::net

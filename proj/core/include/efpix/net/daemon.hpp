#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "efpix/net/framing.hpp"
#include "efpix/relay.hpp"
#include "efpix/rng.hpp"

namespace efpix::net {

struct DaemonConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = -1;  // -1 = do not listen, 0 = ephemeral
    std::vector<std::string> peers;
    std::string keystore_path;
    NodeConfig node;
    std::size_t outbox_capacity = 1024;
    Duration dial_retry_interval = 500'000;
    std::uint32_t dial_attempts = 40;

    void validate() const;  // needs a listen address or at least one peer
};

DaemonConfig daemon_config_from_json(const std::string& text);
DaemonConfig load_daemon_config(const std::string& path);

// Live relay node over TCP. One reader thread per connection feeds the
// serialized node state machine; writes go through bounded per-peer outboxes
// drained by writer threads (overflow drops frames and counts them).
// DELIVERED results are emitted as line-delimited JSON on the event stream.
class Daemon {
public:
    Daemon(DaemonConfig config, ContactBook book, std::ostream& events);
    ~Daemon();

    Daemon(const Daemon&) = delete;
    Daemon& operator=(const Daemon&) = delete;

    void start();
    void stop();

    std::uint16_t bound_port() const { return bound_port_; }
    std::uint64_t delivered_count() const { return delivered_; }
    std::uint64_t dropped_outbox_frames() const { return dropped_outbox_; }
    std::size_t connection_count();

    // Feed one frame as if it arrived on the given link; used by tests and
    // local injection.
    void inject(ByteSpan frame, std::optional<LinkId> arrival);

private:
    struct Peer {
        LinkId link = 0;
        Socket socket;
        std::deque<Bytes> outbox;
        std::mutex mutex;
        std::condition_variable wake;
        std::thread reader;
        std::thread writer;
        std::atomic<bool> open{true};
    };

    void accept_loop();
    void dial_peer(std::string spec);
    void add_connection(Socket socket);
    void reader_loop(std::shared_ptr<Peer> peer);
    void writer_loop(std::shared_ptr<Peer> peer);
    void scheduler_loop();
    void dummy_loop();
    void handle_frame(ByteSpan frame, std::optional<LinkId> arrival);
    void relay_frame(const Bytes& frame, std::optional<LinkId> arrival);
    void enqueue(const std::shared_ptr<Peer>& peer, const Bytes& frame);
    void drop_connection(LinkId link);
    void refresh_neighbors_locked();
    void emit_delivered(const DecodedResult& result);

    DaemonConfig config_;
    std::ostream& events_;
    std::mutex events_mutex_;

    std::mutex node_mutex_;
    RelayNode node_;
    Rng rng_;

    Socket listener_;
    std::uint16_t bound_port_ = 0;

    std::mutex peers_mutex_;
    std::map<LinkId, std::shared_ptr<Peer>> peers_;
    std::vector<std::shared_ptr<Peer>> dead_peers_;  // awaiting thread reaping in stop()
    LinkId next_link_ = 1;

    std::thread accept_thread_;
    std::vector<std::thread> dial_threads_;
    std::thread scheduler_thread_;
    std::thread dummy_thread_;

    std::mutex scheduler_mutex_;
    std::condition_variable scheduler_wake_;
    std::multimap<Timestamp, std::pair<Bytes, std::optional<LinkId>>> scheduled_;

    std::atomic<bool> running_{false};
    std::atomic<std::uint64_t> delivered_{0};
    std::atomic<std::uint64_t> dropped_outbox_{0};
};

Timestamp wall_clock_us();

}  // namespace efpix::net

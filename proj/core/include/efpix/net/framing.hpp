#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "efpix/bytes.hpp"

namespace efpix::net {

// Wire framing: 4-byte big-endian length (always 580 for v1) || frame bytes.
inline constexpr std::size_t kLengthPrefix = 4;
inline constexpr std::size_t kFrameSize = 580;

// Move-only owning fd.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();
    // Unblocks any reader stuck in recv before closing.
    void shutdown();

private:
    int fd_ = -1;
};

Socket connect_tcp(const std::string& host, std::uint16_t port);  // throws Error{io_error}
Socket listen_tcp(const std::string& host, std::uint16_t port, std::uint16_t* bound_port = nullptr);
Socket accept_tcp(const Socket& listener);  // invalid socket when interrupted/closed

// Throws Error{io_error} when the peer vanishes mid-write.
void write_frame(int fd, ByteSpan frame);

// nullopt on clean EOF. Throws Error{protocol_violation} on a length prefix
// other than 580 and Error{io_error} on a short read; both mean the caller
// must drop the connection.
std::optional<Bytes> read_frame(int fd);

std::pair<std::string, std::uint16_t> split_host_port(const std::string& spec);

}  // namespace efpix::net

#include "efpix/net/framing.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "efpix/error.hpp"

namespace efpix::net {

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            raise(Errc::io_error, std::string("send: ") + std::strerror(errno));
        }
        if (n == 0) raise(Errc::io_error, "connection closed during write");
        sent += static_cast<std::size_t>(n);
    }
}

// true = got all bytes, false = clean EOF before the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            raise(Errc::io_error, std::string("recv: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (got == 0) return false;
            raise(Errc::io_error, "connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

void write_frame(int fd, ByteSpan frame) {
    if (frame.size() != kFrameSize) {
        raise(Errc::bad_length, "frame must be " + std::to_string(kFrameSize) + " bytes");
    }
    std::uint8_t header[kLengthPrefix] = {
        static_cast<std::uint8_t>((kFrameSize >> 24) & 0xff),
        static_cast<std::uint8_t>((kFrameSize >> 16) & 0xff),
        static_cast<std::uint8_t>((kFrameSize >> 8) & 0xff),
        static_cast<std::uint8_t>(kFrameSize & 0xff),
    };
    Bytes buffer;
    buffer.reserve(kLengthPrefix + frame.size());
    buffer.insert(buffer.end(), header, header + kLengthPrefix);
    buffer.insert(buffer.end(), frame.begin(), frame.end());
    write_all(fd, buffer.data(), buffer.size());
}

std::optional<Bytes> read_frame(int fd) {
    std::uint8_t header[kLengthPrefix];
    if (!read_all(fd, header, kLengthPrefix)) return std::nullopt;
    std::uint32_t len = (static_cast<std::uint32_t>(header[0]) << 24) |
                        (static_cast<std::uint32_t>(header[1]) << 16) |
                        (static_cast<std::uint32_t>(header[2]) << 8) | header[3];
    if (len != kFrameSize) {
        raise(Errc::protocol_violation, "frame length " + std::to_string(len));
    }
    Bytes frame(kFrameSize);
    if (!read_all(fd, frame.data(), frame.size())) {
        raise(Errc::io_error, "connection closed mid-frame");
    }
    return frame;
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& spec) {
    std::size_t colon = spec.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= spec.size()) {
        raise(Errc::config_error, "expected host:port, got '" + spec + "'");
    }
    int port = 0;
    try {
        port = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        raise(Errc::config_error, "bad port in '" + spec + "'");
    }
    if (port < 0 || port > 65535) raise(Errc::config_error, "port out of range in '" + spec + "'");
    return {spec.substr(0, colon), static_cast<std::uint16_t>(port)};
}

namespace {

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (host.empty() || host == "*") {
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        return addr;
    }
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
        raise(Errc::io_error, "cannot resolve host '" + host + "'");
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
    freeaddrinfo(result);
    return addr;
}

}  // namespace

Socket connect_tcp(const std::string& host, std::uint16_t port) {
    sockaddr_in addr = resolve(host, port);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) raise(Errc::io_error, std::string("socket: ") + std::strerror(errno));
    Socket sock(fd);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        raise(Errc::io_error, "connect " + host + ":" + std::to_string(port) + ": " +
                                  std::strerror(errno));
    }
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return sock;
}

Socket listen_tcp(const std::string& host, std::uint16_t port, std::uint16_t* bound_port) {
    sockaddr_in addr = resolve(host, port);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) raise(Errc::io_error, std::string("socket: ") + std::strerror(errno));
    Socket sock(fd);
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        raise(Errc::io_error, "bind " + host + ":" + std::to_string(port) + ": " +
                                  std::strerror(errno));
    }
    if (::listen(fd, 16) != 0) {
        raise(Errc::io_error, std::string("listen: ") + std::strerror(errno));
    }
    if (bound_port != nullptr) {
        sockaddr_in actual{};
        socklen_t len = sizeof(actual);
        if (getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len) == 0) {
            *bound_port = ntohs(actual.sin_port);
        }
    }
    return sock;
}

Socket accept_tcp(const Socket& listener) {
    int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd < 0) return Socket();
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return Socket(fd);
}

}  // namespace efpix::net

// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/fed/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace tessera::fed {

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::shutdown() const noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::send_all(std::string_view data) const {
    while (!data.empty()) {
        const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw FedError(std::string("send failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

bool Socket::recv_exact(char* dst, std::size_t n) const {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(fd_, dst + got, n - got, 0);
        if (r == 0) {
            if (got == 0) return false;
            throw FedError("connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            throw FedError(std::string("recv failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

Endpoint parse_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0) throw FedError("endpoint '" + endpoint + "' is not host:port");
    unsigned port = 0;
    const char* b = endpoint.data() + colon + 1;
    const char* e = endpoint.data() + endpoint.size();
    auto [p, ec] = std::from_chars(b, e, port);
    if (ec != std::errc() || p != e || port == 0 || port > 65535)
        throw FedError("endpoint '" + endpoint + "' has an invalid port");
    return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

Socket connect_to(const std::string& endpoint) {
    const Endpoint ep = parse_endpoint(endpoint);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(ep.port);
    if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0)
        throw FedError("cannot resolve " + endpoint + ": " + ::gai_strerror(rc));
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    const int rc = s.valid() ? ::connect(s.fd(), res->ai_addr, res->ai_addrlen) : -1;
    const int err = errno;
    ::freeaddrinfo(res);
    if (rc != 0) throw FedError("cannot connect to " + endpoint + ": " + std::strerror(err));
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

Listener::Listener(std::uint16_t port) : sock_(::socket(AF_INET, SOCK_STREAM, 0)) {
    if (!sock_.valid()) throw FedError(std::string("socket failed: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw FedError("cannot bind port " + std::to_string(port) + ": " + std::strerror(errno));
    if (::listen(sock_.fd(), 64) != 0) throw FedError(std::string("listen failed: ") + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

std::optional<Socket> Listener::accept() const {
    while (true) {
        const int fd = ::accept(sock_.fd(), nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return Socket(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return std::nullopt;
    }
}

void write_message(const Socket& s, const Message& m) { s.send_all(encode(m)); }

std::optional<Message> read_message(const Socket& s) {
    char head[kHeaderSize];
    if (!s.recv_exact(head, kHeaderSize)) return std::nullopt;
    const Header h = decode_header(std::string_view(head, kHeaderSize));
    Message m{h.type, h.request_id, std::string(static_cast<std::size_t>(h.payload_len), '\0')};
    if (h.payload_len > 0 && !s.recv_exact(m.payload.data(), m.payload.size()))
        throw FedError("connection closed mid-frame");
    return m;
}

} // namespace tessera::fed

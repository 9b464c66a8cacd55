#include "printjack/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <charconv>
#include <utility>

namespace printjack::net {
namespace {

std::atomic<std::uint64_t> g_outbound{0};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in make_addr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
    throw NetError("not an IPv4 address: " + ep.host);
  }
  return addr;
}

Endpoint from_addr(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
  return Endpoint{buf, ntohs(addr.sin_port)};
}

bool wait_fd(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw NetError(errno_text("poll"));
    return rc > 0;
  }
}

}  // namespace

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

bool is_ipv4(std::string_view text) {
  in_addr a{};
  return ::inet_pton(AF_INET, std::string(text).c_str(), &a) == 1;
}

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("expected ip:port, got '" + std::string(text) + "'");
  const std::string_view host = text.substr(0, colon);
  const std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
    throw std::invalid_argument("bad port in '" + std::string(text) + "'");
  }
  if (!is_ipv4(host)) throw std::invalid_argument("bad IPv4 address in '" + std::string(text) + "'");
  return Endpoint{std::string(host), static_cast<std::uint16_t>(port)};
}

bool is_loopback_or_private(std::string_view ipv4) {
  in_addr a{};
  if (::inet_pton(AF_INET, std::string(ipv4).c_str(), &a) != 1) return false;
  const std::uint32_t ip = ntohl(a.s_addr);
  const auto in = [ip](std::uint32_t net, int bits) { return (ip >> (32 - bits)) == (net >> (32 - bits)); };
  return in(0x7F000000u, 8) || in(0x0A000000u, 8) || in(0xAC100000u, 12) || in(0xC0A80000u, 16);
}

void check_target(const Endpoint& target, const TargetPolicy& policy) {
  if (!policy.allow_public && !is_loopback_or_private(target.host)) {
    throw GuardError("refusing non-private target " + target.to_string() +
                     " (pass --i-own-these-targets to acknowledge ownership)");
  }
}

std::uint64_t outbound_socket_count() noexcept { return g_outbound.load(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::send_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("send"));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::size_t Socket::recv_some(char* buf, std::size_t len, std::chrono::milliseconds timeout) {
  for (;;) {
    if (!wait_fd(fd_, POLLIN, timeout)) throw NetError("recv timed out");
    const ssize_t n = ::recv(fd_, buf, len, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("recv"));
    }
    return static_cast<std::size_t>(n);
  }
}

std::string Socket::read_to_eof(std::chrono::milliseconds idle_timeout) {
  std::string out;
  char buf[16384];
  for (;;) {
    const std::size_t n = recv_some(buf, sizeof buf, idle_timeout);
    if (n == 0) return out;
    out.append(buf, n);
  }
}

void Socket::shutdown_write() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void Socket::shutdown_both() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Endpoint Socket::peer() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return {};
  return from_addr(addr);
}

Endpoint Socket::local() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return {};
  return from_addr(addr);
}

Socket connect_tcp(const Endpoint& target, std::chrono::milliseconds timeout, const TargetPolicy& policy) {
  check_target(target, policy);
  const sockaddr_in addr = make_addr(target);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) throw NetError(errno_text("socket"));
  g_outbound.fetch_add(1);

  const int flags = ::fcntl(sock.fd(), F_GETFL, 0);
  ::fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
  if (rc != 0 && errno != EINPROGRESS) {
    throw NetError("connect " + target.to_string() + ": " + std::strerror(errno));
  }
  if (rc != 0) {
    if (!wait_fd(sock.fd(), POLLOUT, timeout)) throw NetError("connect " + target.to_string() + ": timed out");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw NetError("connect " + target.to_string() + ": " + std::strerror(err));
  }
  ::fcntl(sock.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return sock;
}

Listener::Listener(const std::string& host, std::uint16_t port) : host_(host) {
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock_.valid()) throw NetError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const sockaddr_in addr = make_addr(Endpoint{host, port});
  if (::bind(sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw NetError("cannot bind " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  if (::listen(sock_.fd(), 512) != 0) {
    throw NetError("cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
  }
  port_ = sock_.local().port;
}

std::optional<Socket> Listener::accept_for(std::chrono::milliseconds timeout) {
  if (!sock_.valid() || !wait_fd(sock_.fd(), POLLIN, timeout)) return std::nullopt;
  const int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

}  // namespace printjack::net

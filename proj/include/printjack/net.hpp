#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

// Thin RAII layer over POSIX TCP sockets, shared by the printer emulator,
// the attacker client and the tap.
namespace printjack::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a connection to a public address is attempted without the
/// operator acknowledging ownership of the target.
class GuardError : public NetError {
 public:
  using NetError::NetError;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Parses `a.b.c.d:port`. Throws std::invalid_argument.
Endpoint parse_endpoint(std::string_view text);

bool is_ipv4(std::string_view text);

/// True for 127/8, 10/8, 172.16/12 and 192.168/16.
bool is_loopback_or_private(std::string_view ipv4);

struct TargetPolicy {
  bool allow_public = false;
};

/// Throws GuardError unless the host is loopback/RFC 1918 or the policy allows it.
void check_target(const Endpoint& target, const TargetPolicy& policy);

/// Number of outbound TCP sockets created through connect_tcp in this process.
std::uint64_t outbound_socket_count() noexcept;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void close() noexcept;

  /// Writes everything or throws NetError.
  void send_all(std::string_view data);
  /// Returns 0 on orderly EOF. Throws NetError on error or timeout.
  std::size_t recv_some(char* buf, std::size_t len, std::chrono::milliseconds timeout);
  /// Reads until the peer half-closes.
  std::string read_to_eof(std::chrono::milliseconds idle_timeout);
  void shutdown_write() noexcept;
  void shutdown_both() noexcept;

  Endpoint peer() const;
  Endpoint local() const;

 private:
  int fd_ = -1;
};

/// Guarded, timed connect. Throws GuardError or NetError.
Socket connect_tcp(const Endpoint& target, std::chrono::milliseconds timeout, const TargetPolicy& policy);

class Listener {
 public:
  /// Binds host:port (port 0 picks an ephemeral port). Throws NetError naming the port.
  Listener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const noexcept { return port_; }
  const std::string& host() const noexcept { return host_; }

  /// Waits up to `timeout` for a connection.
  std::optional<Socket> accept_for(std::chrono::milliseconds timeout);
  void close() noexcept { sock_.close(); }

 private:
  Socket sock_;
  std::string host_;
  std::uint16_t port_ = 0;
};

}  // namespace printjack::net

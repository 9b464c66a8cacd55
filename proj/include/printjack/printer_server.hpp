#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "printjack/net.hpp"
#include "printjack/pjl.hpp"
#include "printjack/printer.hpp"

namespace printjack::printer {

struct ServerStats {
  std::uint64_t data_connections = 0;
  std::uint64_t data_bytes = 0;
  std::uint64_t control_connections = 0;
};

/// A running emulated printer: raw data listener, control listener and the
/// engine behind them.
///
/// Data port: one connection is one job; the job is everything the client
/// sends before half-closing. The printer applies the job, then closes its
/// side without writing anything, so a client that waits for EOF knows the
/// job has been applied. A printer stuck in BUSY_LOOP still drains the bytes
/// and records REJECTED_BUSY.
///
/// Control port: the client sends `@PJL SET` lines and half-closes; the
/// printer answers with `@PJL MODEL=<model>` and an `@PJL INFO` status line.
class PrinterServer {
 public:
  /// Binds both ports (0 = ephemeral). Throws net::NetError naming the port
  /// that failed, or ProfileError.
  explicit PrinterServer(PrinterProfile profile);
  ~PrinterServer();
  PrinterServer(const PrinterServer&) = delete;
  PrinterServer& operator=(const PrinterServer&) = delete;

  /// Closes listeners, aborts in-flight connections and joins every worker.
  void stop();

  std::uint16_t data_port() const noexcept { return data_listener_.port(); }
  std::uint16_t control_port() const noexcept { return control_listener_.port(); }
  net::Endpoint data_endpoint() const { return {data_listener_.host(), data_port()}; }
  net::Endpoint control_endpoint() const { return {control_listener_.host(), control_port()}; }
  const PrinterProfile& profile() const noexcept { return engine_.profile(); }

  PrinterEngine& engine() noexcept { return engine_; }
  const PrinterEngine& engine() const noexcept { return engine_; }

  ServerStats stats() const;
  std::vector<pjl::JobMetadata> received_metadata() const;

  /// Blocks until `jobs` data connections have been fully applied.
  bool wait_for_data_jobs(std::uint64_t jobs, std::chrono::milliseconds timeout) const;

  void set_idle_timeout(std::chrono::milliseconds t) noexcept { idle_timeout_ = t; }

 private:
  void accept_loop(net::Listener& listener, bool control);
  void spawn(net::Socket sock, bool control);
  void handle_data(net::Socket& sock);
  void handle_control(net::Socket& sock);

  PrinterEngine engine_;
  net::Listener data_listener_;
  net::Listener control_listener_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::chrono::milliseconds> idle_timeout_{std::chrono::seconds(30)};

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  ServerStats stats_;
  std::uint64_t data_jobs_done_ = 0;
  std::vector<pjl::JobMetadata> metadata_;
  std::set<int> live_fds_;
  std::size_t workers_ = 0;

  std::thread data_thread_;
  std::thread control_thread_;
};

/// Convenience constructor mirroring the other module entry points.
std::unique_ptr<PrinterServer> start_printer(PrinterProfile profile);

}  // namespace printjack::printer

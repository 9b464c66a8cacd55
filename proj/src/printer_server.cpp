#include "printjack/printer_server.hpp"

#include <sys/socket.h>

namespace printjack::printer {

using namespace std::chrono_literals;

PrinterServer::PrinterServer(PrinterProfile profile)
    : engine_((profile.validate(), std::move(profile))),
      data_listener_(engine_.profile().bind_host, engine_.profile().data_port),
      control_listener_(engine_.profile().bind_host, engine_.profile().control_port) {
  data_thread_ = std::thread([this] { accept_loop(data_listener_, false); });
  control_thread_ = std::thread([this] { accept_loop(control_listener_, true); });
}

PrinterServer::~PrinterServer() { stop(); }

void PrinterServer::stop() {
  if (stopping_.exchange(true)) return;
  if (data_thread_.joinable()) data_thread_.join();
  if (control_thread_.joinable()) control_thread_.join();
  data_listener_.close();
  control_listener_.close();
  std::unique_lock lock(mu_);
  for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
  cv_.wait(lock, [this] { return workers_ == 0; });
}

void PrinterServer::accept_loop(net::Listener& listener, bool control) {
  while (!stopping_) {
    auto sock = listener.accept_for(50ms);
    if (sock) spawn(std::move(*sock), control);
  }
}

void PrinterServer::spawn(net::Socket sock, bool control) {
  {
    std::lock_guard lock(mu_);
    ++workers_;
    live_fds_.insert(sock.fd());
    if (control) {
      ++stats_.control_connections;
    } else {
      ++stats_.data_connections;
    }
  }
  std::thread([this, s = std::move(sock), control]() mutable {
    try {
      if (control) {
        handle_control(s);
      } else {
        handle_data(s);
      }
    } catch (const net::NetError&) {
      // peer vanished or timed out; the job is dropped
    }
    std::lock_guard lock(mu_);
    live_fds_.erase(s.fd());
    s.close();
    --workers_;
    cv_.notify_all();
  }).detach();
}

void PrinterServer::handle_data(net::Socket& sock) {
  const std::string payload = sock.read_to_eof(idle_timeout_.load());
  if (stopping_) return;
  engine_.submit(payload);
  std::lock_guard lock(mu_);
  stats_.data_bytes += payload.size();
  ++data_jobs_done_;
  cv_.notify_all();
}

void PrinterServer::handle_control(net::Socket& sock) {
  const std::string inbound = sock.read_to_eof(idle_timeout_.load());
  if (stopping_) return;
  pjl::JobMetadata md = pjl::extract_metadata(inbound);
  md.printer_model.reset();  // clients cannot assert the model
  {
    std::lock_guard lock(mu_);
    metadata_.push_back(md);
  }
  const PrinterSnapshot snap = engine_.snapshot();
  std::string reply = pjl::format_model_line(profile().model);
  reply += "@PJL INFO STATUS=";
  reply += to_string(snap.engine);
  reply += " REJECTED=" + std::to_string(snap.counters.jobs_rejected) + "\n";
  sock.send_all(reply);
}

ServerStats PrinterServer::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::vector<pjl::JobMetadata> PrinterServer::received_metadata() const {
  std::lock_guard lock(mu_);
  return metadata_;
}

bool PrinterServer::wait_for_data_jobs(std::uint64_t jobs, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return data_jobs_done_ >= jobs; });
}

std::unique_ptr<PrinterServer> start_printer(PrinterProfile profile) {
  return std::make_unique<PrinterServer>(std::move(profile));
}

}  // namespace printjack::printer

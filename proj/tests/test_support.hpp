#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <mutex>
#include <thread>
#include <unistd.h>

#include "printjack/net.hpp"
#include "printjack/printer.hpp"

namespace test_support {

inline printjack::printer::PrinterProfile ephemeral(printjack::printer::PrinterProfile p) {
  p.data_port = 0;
  p.control_port = 0;
  return p;
}

inline printjack::printer::PrinterProfile ephemeral_default(printjack::printer::Sheets sheets = 150) {
  return ephemeral(printjack::printer::default_profile(sheets));
}

/// Accepts connections on an ephemeral loopback port and records the bytes
/// of the most recent one.
class RecordingSink {
 public:
  RecordingSink() : listener_("127.0.0.1", 0), thread_([this] { loop(); }) {}
  ~RecordingSink() {
    stop_ = true;
    thread_.join();
  }
  printjack::net::Endpoint endpoint() const { return {"127.0.0.1", listener_.port()}; }
  std::string last() const {
    std::lock_guard lock(mu_);
    return last_;
  }
  int connections() const { return connections_.load(); }

 private:
  void loop() {
    using namespace std::chrono_literals;
    while (!stop_) {
      if (auto s = listener_.accept_for(20ms)) {
        std::string bytes;
        try {
          bytes = s->read_to_eof(5s);
        } catch (const printjack::net::NetError&) {
        }
        {
          std::lock_guard lock(mu_);
          last_ = bytes;
        }
        ++connections_;
      }
    }
  }
  printjack::net::Listener listener_;
  std::atomic<bool> stop_{false};
  std::atomic<int> connections_{0};
  mutable std::mutex mu_;
  std::string last_;
  std::thread thread_;
};

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("printjack_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support

#pragma once

// Brute-force single-step printer model used as a test oracle. It shares no
// code with the library: pages are counted byte by byte, and paper is taken
// one sheet at a time from the first non-empty tray.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reference {

enum class State { Ready, BusyLoop, OutOfPaper };
enum class Status { Completed, Partial, Rejected, Loop };

struct Outcome {
  long pages = 0;
  long consumed = 0;
  Status status = Status::Completed;
};

struct Printer {
  std::vector<long> capacity;
  std::vector<long> remaining;
  State state = State::Ready;
  long jobs_completed = 0;
  long jobs_rejected = 0;
  long loops = 0;
  long sheets_printed = 0;
  std::optional<long> watchdog_ms;
  long busy_ms = 0;

  explicit Printer(std::vector<long> trays, std::optional<long> watchdog = std::nullopt)
      : capacity(trays), remaining(trays), watchdog_ms(watchdog) {
    settle();
  }

  bool has_paper() const {
    for (long r : remaining)
      if (r > 0) return true;
    return false;
  }

  void settle() { state = has_paper() ? State::Ready : State::OutOfPaper; }

  static long count_pages(const std::string& payload) {
    if (payload.empty()) return 0;
    long pages = 1;
    for (char c : payload)
      if (c == '\x0c') ++pages;
    return pages;
  }

  static bool contains_loop(const std::string& payload) {
    const std::string sig = "{} loop";
    for (std::size_t i = 0; i + sig.size() <= payload.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < sig.size() && match; ++k) match = payload[i + k] == sig[k];
      if (match) return true;
    }
    return false;
  }

  Outcome submit(const std::string& payload) {
    Outcome o;
    o.pages = count_pages(payload);
    if (state == State::BusyLoop) {
      ++jobs_rejected;
      o.status = Status::Rejected;
      return o;
    }
    if (contains_loop(payload)) {
      state = State::BusyLoop;
      busy_ms = 0;
      ++loops;
      o.status = Status::Loop;
      return o;
    }
    for (long page = 0; page < o.pages; ++page) {
      bool printed = false;
      for (std::size_t t = 0; t < remaining.size() && !printed; ++t) {
        if (remaining[t] > 0) {
          --remaining[t];
          printed = true;
        }
      }
      if (!printed) break;
      ++o.consumed;
    }
    sheets_printed += o.consumed;
    ++jobs_completed;
    o.status = o.consumed == o.pages ? Status::Completed : Status::Partial;
    settle();
    return o;
  }

  long reload(std::size_t tray, long sheets) {
    for (long i = 0; i < sheets && remaining[tray] < capacity[tray]; ++i) ++remaining[tray];
    if (state == State::OutOfPaper) settle();
    return remaining[tray];
  }

  void reset() {
    jobs_completed = jobs_rejected = loops = sheets_printed = 0;
    busy_ms = 0;
    settle();
  }

  void tick(long ms) {
    if (state != State::BusyLoop || !watchdog_ms) return;
    busy_ms += ms;
    if (busy_ms >= *watchdog_ms) {
      busy_ms = 0;
      settle();
    }
  }
};

}  // namespace reference

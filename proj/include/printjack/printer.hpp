#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace printjack::printer {

using Sheets = std::int64_t;

/// Simulated time. Only tick_watchdog advances it; wall-clock never does.
using SimDuration = std::chrono::milliseconds;

inline constexpr std::uint16_t kDefaultDataPort = 9100;
inline constexpr std::uint16_t kDefaultControlPort = 65002;

/// Substring that sends the emulated interpreter into a non-terminating loop.
inline constexpr std::string_view kLoopSignature = "{} loop";

class ProfileError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrayState {
  Sheets capacity = 0;
  Sheets remaining = 0;
  friend bool operator==(const TrayState&, const TrayState&) = default;
};

struct PrinterProfile {
  std::string model = "Generic raw-9100 printer";
  std::vector<Sheets> trays{150};  // capacities, in declaration order
  std::uint16_t data_port = kDefaultDataPort;
  std::uint16_t control_port = kDefaultControlPort;
  std::optional<SimDuration> watchdog_reboot_after;
  std::string bind_host = "127.0.0.1";

  /// Throws ProfileError on a violated invariant. Port 0 means "ephemeral".
  void validate() const;
};

PrinterProfile default_profile(Sheets tray_capacity = 150);

/// HP LaserJet M2727nf: reboots itself after ten minutes stuck in a loop.
PrinterProfile m2727nf_profile();

/// Reads the profile file layout: model, trays (capacities), data_port,
/// control_port, watchdog_reboot_after_secs. Missing ports take `default_ports`
/// (9100/65002 for standalone use, 0 for auto-allocated fleets).
PrinterProfile profile_from_json(const nlohmann::json& j, bool ephemeral_default_ports = false);
nlohmann::json to_json(const PrinterProfile& p);

enum class EngineState { Ready, Printing, BusyLoop, OutOfPaper };
enum class JobStatus { Completed, PartialOutOfPaper, RejectedBusy, LoopTriggered };

std::string_view to_string(EngineState s) noexcept;
std::string_view to_string(JobStatus s) noexcept;

struct JobOutcome {
  Sheets pages_requested = 0;
  Sheets sheets_consumed = 0;
  JobStatus status = JobStatus::Completed;
  friend bool operator==(const JobOutcome&, const JobOutcome&) = default;
};

nlohmann::json to_json(const JobOutcome& o);

/// 0 for an empty payload, otherwise 1 + number of form feeds.
Sheets page_count(std::string_view payload) noexcept;
bool is_loop_payload(std::string_view payload) noexcept;

/// Zeroed by reset().
struct Counters {
  std::uint64_t jobs_completed = 0;  // COMPLETED and PARTIAL_OUT_OF_PAPER
  std::uint64_t jobs_rejected = 0;
  std::uint64_t loops_triggered = 0;
  Sheets sheets_printed = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

/// Lifetime paper accounting, never reset. Conservation:
/// initial + reloaded == remaining + consumed.
struct PaperLedger {
  Sheets initial = 0;
  Sheets reloaded = 0;
  Sheets consumed = 0;
  friend bool operator==(const PaperLedger&, const PaperLedger&) = default;
};

struct PrinterSnapshot {
  std::vector<TrayState> trays;
  EngineState engine = EngineState::Ready;
  Counters counters;
  PaperLedger ledger;
  SimDuration busy_elapsed{0};
  std::uint64_t watchdog_reboots = 0;

  Sheets remaining() const noexcept;
  bool conserves_paper() const noexcept { return ledger.initial + ledger.reloaded == remaining() + ledger.consumed; }
};

nlohmann::json to_json(const PrinterSnapshot& s);

/// The print engine of one emulated printer. Every mutation holds one lock,
/// so jobs are applied strictly one at a time and snapshots always fall on
/// job boundaries.
class PrinterEngine {
 public:
  explicit PrinterEngine(PrinterProfile profile);

  const PrinterProfile& profile() const noexcept { return profile_; }

  JobOutcome submit(std::string_view payload);

  /// Adds up to `sheets` (clamped at capacity); returns the new remaining count.
  /// Throws std::out_of_range for a bad tray index, std::invalid_argument for sheets < 0.
  Sheets reload_tray(std::size_t tray_index, Sheets sheets);

  /// Clears BUSY_LOOP and zeroes counters. Trays keep their paper.
  void reset();

  /// Advances the simulated clock while looping; reboots once the profile's
  /// watchdog interval has accumulated. Returns the resulting engine state.
  EngineState tick_watchdog(SimDuration elapsed);

  std::vector<TrayState> tray_status() const;
  EngineState engine() const;
  PrinterSnapshot snapshot() const;
  std::vector<JobOutcome> job_log() const;

 private:
  EngineState idle_state_locked() const noexcept;

  const PrinterProfile profile_;
  mutable std::mutex mu_;
  std::vector<TrayState> trays_;
  EngineState engine_ = EngineState::Ready;
  Counters counters_;
  PaperLedger ledger_;
  SimDuration busy_elapsed_{0};
  std::uint64_t reboots_ = 0;
  std::vector<JobOutcome> log_;
};

}  // namespace printjack::printer

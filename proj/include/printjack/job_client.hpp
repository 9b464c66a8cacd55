#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "printjack/net.hpp"
#include "printjack/pjl.hpp"

// Attacker-side raw-9100 client and the repeated-job flood procedure.
namespace printjack::client {

class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SendOptions {
  std::chrono::milliseconds connect_timeout{5000};
  /// How long to wait for the printer to close its side after we half-close.
  std::chrono::milliseconds completion_timeout{30000};
  net::TargetPolicy policy;
};

/// Frames lines as raw bytes: every line followed by exactly one LF.
std::string frame_lines(const std::vector<std::string>& lines);

/// One job over one TCP connection. Sends the framed lines, half-closes and
/// waits for the printer to close. Returns bytes written.
std::size_t send_job(const net::Endpoint& target, const std::vector<std::string>& lines,
                     const SendOptions& options = {});

/// Same framing rules, arbitrary bytes.
std::size_t send_raw(const net::Endpoint& target, std::string_view payload, const SendOptions& options = {});

/// Writes the SET lines for `metadata` to the control channel, half-closes
/// and returns the printer's reply.
std::string send_metadata(const net::Endpoint& control, const pjl::JobMetadata& metadata,
                          const SendOptions& options = {});

/// Parses the targets file layout: `<ip>` or `<ip>,<port>` per line, `#`
/// comments, blank lines and an `IP,PORT[,...]` header ignored. Bare IPs take
/// `default_port`. Throws PlanError on a malformed line.
std::vector<net::Endpoint> parse_targets(std::string_view text, std::uint16_t default_port = 9100);
std::vector<net::Endpoint> load_targets(const std::filesystem::path& path, std::uint16_t default_port = 9100);

/// Bot file lines with their terminators removed.
std::vector<std::string> split_bot_lines(std::string_view text);
std::vector<std::string> load_bot(const std::filesystem::path& path);

struct FloodPlan {
  std::vector<net::Endpoint> targets;
  std::vector<std::string> bot_payload;
  std::uint32_t repetitions = 1000;
  SendOptions send;
  std::chrono::milliseconds inter_job_delay{0};
  /// Targets flooded concurrently; jobs for a single target stay in order.
  std::size_t parallel_targets = 1;

  /// Throws PlanError (repetitions == 0, no targets).
  void validate() const;

  /// Reads both files before any network activity; throws PlanError if
  /// either is unreadable.
  static FloodPlan from_files(const std::filesystem::path& targets_file, const std::filesystem::path& bot_file,
                              std::uint32_t repetitions, std::uint16_t default_port = 9100);
};

struct TargetCounters {
  net::Endpoint target;
  std::uint64_t jobs_attempted = 0;
  std::uint64_t jobs_connected = 0;
  std::uint64_t jobs_refused = 0;
  std::uint64_t bytes_sent = 0;
  std::vector<std::string> errors;  // first few, for diagnostics
};

struct FloodResult {
  std::vector<TargetCounters> per_target;  // plan order

  std::uint64_t total_attempted() const noexcept;
  std::uint64_t total_connected() const noexcept;
  std::uint64_t total_refused() const noexcept;
  std::uint64_t total_bytes() const noexcept;
};

nlohmann::json to_json(const FloodResult& r);

/// Called after every job with (target index, repetition index).
using JobHook = std::function<void(std::size_t, std::uint32_t)>;

/// Outer loop over targets in order, inner loop over repetitions. Failures
/// are counted per job and never abort the plan. Guard violations are
/// checked for every target before the first connection.
FloodResult run_flood(const FloodPlan& plan, const JobHook& after_job = {});

}  // namespace printjack::client

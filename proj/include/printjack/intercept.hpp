#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "printjack/net.hpp"
#include "printjack/pjl.hpp"

// In-path tap between a print client and a printer, plus the analysis run
// over what it captured.
namespace printjack::intercept {

enum class Channel { Data, Control };
enum class DocumentFormat { Pdf, Plaintext, Binary };

std::string_view to_string(Channel c) noexcept;
std::string_view to_string(DocumentFormat f) noexcept;

using TimestampMs = std::int64_t;  // milliseconds since the Unix epoch

struct InterceptedJob {
  std::uint64_t id = 0;
  net::Endpoint source;
  net::Endpoint destination;
  Channel channel = Channel::Data;
  std::string payload;   // client -> printer, capture order
  std::string response;  // printer -> client
  TimestampMs started_at = 0;
  TimestampMs ended_at = 0;
  std::optional<std::string> upstream_error;
};

/// Metadata observed in either direction of the connection.
pjl::JobMetadata job_metadata(const InterceptedJob& job);

inline constexpr double kPlaintextThreshold = 0.9;

struct DocumentSummary {
  std::size_t byte_count = 0;
  double printable_ratio = 0.0;
  DocumentFormat format = DocumentFormat::Binary;
};

struct Document {
  std::string bytes;
  DocumentSummary summary;
};

/// Printable = 0x20..0x7E plus TAB, LF, CR and FF. The ratio of an empty
/// buffer is 0.
double printable_ratio(std::string_view bytes) noexcept;
DocumentSummary summarize(std::string_view bytes) noexcept;

/// Throws std::invalid_argument for a CONTROL job.
Document reassemble_document(const InterceptedJob& job);

enum class FindingKind { Association, ContentBreach };
std::string_view to_string(FindingKind k) noexcept;

struct Finding {
  FindingKind kind;
  std::uint64_t job_id;
  std::string severity;
  std::string detail;
};

/// One ASSOCIATION finding per job whose metadata carries both a username
/// and a job name; one CONTENT_BREACH finding per DATA job whose document
/// is intelligible (PDF or plaintext).
std::vector<Finding> privacy_findings(const std::vector<InterceptedJob>& jobs);

nlohmann::json to_json(const Finding& f);
nlohmann::json to_json(const DocumentSummary& s);

/// Sidecar written next to the raw payload.
nlohmann::json sidecar_json(const InterceptedJob& job);

/// Writes `job-<id>.bin` and `job-<id>.json` under `dir` (created if needed).
void write_capture(const std::filesystem::path& dir, const InterceptedJob& job);

/// Reads every `job-*.json` sidecar and its payload, ordered by id.
std::vector<InterceptedJob> load_captures(const std::filesystem::path& dir);

struct TapOptions {
  std::string bind_host = "127.0.0.1";
  Channel channel = Channel::Data;
  std::optional<std::filesystem::path> capture_dir;
  net::TargetPolicy policy;
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds idle_timeout{30000};
  std::uint64_t first_id = 1;  // keeps ids distinct when several taps share a capture dir
};

/// Forwarding proxy. Each accepted connection gets its own upstream
/// connection and worker; bytes are relayed in both directions unchanged
/// while the client -> printer stream is retained. A job becomes visible
/// through jobs() only once both directions have closed.
class TapServer {
 public:
  TapServer(std::uint16_t listen_port, net::Endpoint upstream, TapOptions options = {});
  ~TapServer();
  TapServer(const TapServer&) = delete;
  TapServer& operator=(const TapServer&) = delete;

  void stop();

  std::uint16_t port() const noexcept { return listener_.port(); }
  net::Endpoint endpoint() const { return {listener_.host(), port()}; }
  const net::Endpoint& upstream() const noexcept { return upstream_; }

  std::vector<InterceptedJob> jobs() const;
  std::vector<std::string> events() const;
  bool wait_for_jobs(std::size_t count, std::chrono::milliseconds timeout) const;

 private:
  void accept_loop();
  void relay(net::Socket client);

  net::Endpoint upstream_;
  TapOptions options_;
  net::Listener listener_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> next_id_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<InterceptedJob> jobs_;
  std::vector<std::string> events_;
  std::set<int> live_fds_;
  std::size_t workers_ = 0;
  std::thread accept_thread_;
};

std::unique_ptr<TapServer> start_tap(std::uint16_t listen_port, net::Endpoint upstream, TapOptions options = {});

}  // namespace printjack::intercept

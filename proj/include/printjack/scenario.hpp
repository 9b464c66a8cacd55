#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "printjack/pjl.hpp"
#include "printjack/printer.hpp"
#include "printjack/risk.hpp"

// Scenario runner: boots emulated printers, taps and clients for one
// Printjack attack and packages the outcome with its risk verdict.
namespace printjack::scenario {

inline constexpr int kReportSchemaVersion = 1;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ScenarioKind { Printjack1Fanout, Printjack2PaperDos, Printjack3Intercept };
enum class ClientMode { Cleartext, MetadataOnly };
enum class ReportFormat { Text, Json };

std::string_view to_string(ScenarioKind k) noexcept;
std::string_view to_string(ClientMode m) noexcept;
std::optional<ScenarioKind> parse_scenario(std::string_view text);
std::optional<ClientMode> parse_client_mode(std::string_view text);
risk::AttackId attack_for(ScenarioKind k) noexcept;

/// Reload `sheets` into `tray` of fleet printer `printer` once job number
/// `after_job` (1-based, counted per target) has completed.
struct ReloadStep {
  std::size_t printer = 0;
  std::uint32_t after_job = 0;
  std::size_t tray = 0;
  printer::Sheets sheets = 0;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Printjack2PaperDos;
  std::vector<printer::PrinterProfile> fleet;

  // paper DoS
  std::optional<std::filesystem::path> targets_file;  // default: the fleet itself
  std::optional<std::filesystem::path> bot_file;
  std::vector<std::string> bot_lines{"hacked printer!!!!"};
  std::uint32_t repetitions = 1000;
  std::vector<ReloadStep> reloads;

  // interception
  std::uint16_t tap_data_port = 0;
  std::uint16_t tap_control_port = 0;
  ClientMode client_mode = ClientMode::Cleartext;
  std::optional<std::filesystem::path> document_file;
  std::size_t sample_document_bytes = 64 * 1024;
  pjl::JobMetadata metadata{"alice", "1001", "WS-ALICE-01", "salaries.pdf", std::nullopt};
  std::optional<std::filesystem::path> capture_dir;

  // fan-out
  std::uint32_t fanout_requests_per_printer = 200;

  std::optional<std::filesystem::path> report_path;
  bool allow_public_targets = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads the `--config` layout. Relative paths resolve against `base_dir`.
ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct TimelineEvent {
  std::int64_t t_ms = 0;  // since scenario start
  std::string source;
  std::string message;
};

struct ScenarioReport {
  ScenarioKind scenario = ScenarioKind::Printjack2PaperDos;
  bool complete = false;
  std::optional<std::string> error;
  std::vector<TimelineEvent> timeline;
  nlohmann::json results = nlohmann::json::object();
  risk::Assessment assessment;
};

/// Throws ConfigError before anything starts when the config is invalid;
/// failures after that yield a report with complete == false.
ScenarioReport run_scenario(const ScenarioConfig& config);

nlohmann::json to_json(const ScenarioReport& report);
std::string render_text(const ScenarioReport& report);
std::string serialize(const ScenarioReport& report, ReportFormat format);

/// Writes the serialized report. Throws std::runtime_error on an unwritable path.
void emit_report(const ScenarioReport& report, ReportFormat format, const std::filesystem::path& path);

/// Deterministic PDF-looking document of exactly `bytes` bytes (at least 16).
std::string make_sample_pdf(std::size_t bytes);

}  // namespace printjack::scenario

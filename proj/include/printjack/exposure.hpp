#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

// Scan-export ingestion (IP,PORT[,COUNTRY] CSV) and per-country exposure
// tables ordered by GDP rank.
namespace printjack::exposure {

struct ExposureRecord {
  std::string ip;
  std::uint16_t port = 0;
  std::string country;  // ISO 3166 alpha-2, upper case
  friend bool operator==(const ExposureRecord&, const ExposureRecord&) = default;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based
  std::string text;
  std::string reason;
};

struct ParsedExport {
  std::vector<ExposureRecord> records;
  std::vector<RejectedRow> rejects;
};

/// Malformed rows land in `rejects`; parsing continues. Two-column rows take
/// `default_country` and are rejected when it is absent.
ParsedExport parse_export_text(std::string_view text, std::optional<std::string> default_country = std::nullopt);

/// Throws std::runtime_error if the file cannot be read.
ParsedExport parse_export(const std::filesystem::path& file,
                          std::optional<std::string> default_country = std::nullopt);

struct GdpEntry {
  int rank = 0;
  std::string code;
  std::string name;
  friend bool operator==(const GdpEntry&, const GdpEntry&) = default;
};

/// Throws std::invalid_argument unless ranks are unique and contiguous from 1.
void validate_gdp_table(const std::vector<GdpEntry>& table);

/// The ten largest European economies of 2018, in GDP order.
const std::vector<GdpEntry>& european_gdp_2018();

std::vector<GdpEntry> gdp_table_from_json(const nlohmann::json& j);
std::vector<GdpEntry> load_gdp_table(const std::filesystem::path& file);

inline constexpr std::string_view kOtherCode = "OTHER";

struct ReportRow {
  int gdp_rank = 0;
  std::string country_code;
  std::string country_name;
  std::uint64_t ip_count = 0;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExposureReport {
  std::vector<ReportRow> rows;  // ascending gdp_rank; OTHER (if any) last
  std::uint64_t total = 0;
  friend bool operator==(const ExposureReport&, const ExposureReport&) = default;
};

/// Counts records per country and joins them onto the GDP table. Records
/// whose country is not in the table are tallied in a trailing OTHER row
/// (ranked after the table), which is omitted when empty.
ExposureReport build_report(const std::vector<ExposureRecord>& records, const std::vector<GdpEntry>& gdp_table);

/// Aligned text table. `thousands` is the digit-group separator used for
/// display only (',' by default; '.' reproduces continental notation).
std::string render_text(const ExposureReport& report, char thousands = ',');

std::string group_digits(std::uint64_t value, char thousands);

nlohmann::json to_json(const ExposureReport& report);
ExposureReport report_from_json(const nlohmann::json& j);

/// Distinct CVE total from two keyword searches and their overlap.
/// Throws std::invalid_argument if overlap exceeds either count or any input is negative.
std::int64_t cve_summary(std::int64_t printer_kw, std::int64_t printers_kw, std::int64_t overlap);

}  // namespace printjack::exposure

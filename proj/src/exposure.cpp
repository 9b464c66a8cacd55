#include "printjack/exposure.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "printjack/net.hpp"

namespace printjack::exposure {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

std::optional<std::string> normalize_country(std::string_view code) {
  if (code.size() != 2 || !std::isalpha(static_cast<unsigned char>(code[0])) ||
      !std::isalpha(static_cast<unsigned char>(code[1]))) {
    return std::nullopt;
  }
  std::string out(code);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_header(const std::vector<std::string_view>& fields) {
  if (fields.empty()) return false;
  std::string first(fields[0]);
  for (char& c : first) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return first == "IP";
}

}  // namespace

ParsedExport parse_export_text(std::string_view text, std::optional<std::string> default_country) {
  std::optional<std::string> fallback;
  if (default_country) {
    fallback = normalize_country(*default_country);
    if (!fallback) throw std::invalid_argument("bad default country code '" + *default_country + "'");
  }

  ParsedExport out;
  std::size_t line_no = 0;
  bool seen_content = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto fields = split_commas(line);
    if (!seen_content) {
      seen_content = true;
      if (is_header(fields)) continue;
    }
    auto reject = [&](std::string reason) { out.rejects.push_back({line_no, std::string(line), std::move(reason)}); };

    if (fields.size() < 2 || fields.size() > 3) {
      reject("expected 2 or 3 columns");
      continue;
    }
    if (!net::is_ipv4(fields[0])) {
      reject("not a dotted-quad IPv4 address");
      continue;
    }
    unsigned port = 0;
    const auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), port);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || port < 1 || port > 65535) {
      reject("port outside [1, 65535]");
      continue;
    }
    std::optional<std::string> country = fields.size() == 3 ? normalize_country(fields[2]) : fallback;
    if (!country) {
      reject(fields.size() == 3 ? "bad country code" : "no country column and no default country");
      continue;
    }
    out.records.push_back({std::string(fields[0]), static_cast<std::uint16_t>(port), std::move(*country)});
  }
  return out;
}

ParsedExport parse_export(const std::filesystem::path& file, std::optional<std::string> default_country) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read export file: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_export_text(ss.str(), std::move(default_country));
}

void validate_gdp_table(const std::vector<GdpEntry>& table) {
  std::set<int> ranks;
  std::set<std::string> codes;
  for (const auto& e : table) {
    if (!ranks.insert(e.rank).second) throw std::invalid_argument("duplicate GDP rank " + std::to_string(e.rank));
    if (!codes.insert(e.code).second) throw std::invalid_argument("duplicate country code " + e.code);
  }
  int expected = 1;
  for (int r : ranks) {
    if (r != expected++) throw std::invalid_argument("GDP ranks must be contiguous from 1");
  }
}

const std::vector<GdpEntry>& european_gdp_2018() {
  static const std::vector<GdpEntry> kTable{
      {1, "DE", "Germany"}, {2, "RU", "Russia"},  {3, "GB", "United Kingdom"}, {4, "FR", "France"},
      {5, "IT", "Italy"},   {6, "ES", "Spain"},   {7, "TR", "Turkey"},         {8, "PL", "Poland"},
      {9, "NL", "Netherlands"}, {10, "CH", "Switzerland"},
  };
  return kTable;
}

std::vector<GdpEntry> gdp_table_from_json(const nlohmann::json& j) {
  std::vector<GdpEntry> out;
  const nlohmann::json& rows = j.is_object() ? j.at("countries") : j;
  for (const auto& row : rows) {
    const auto code = normalize_country(row.at("code").get<std::string>());
    if (!code) throw std::invalid_argument("bad country code in GDP table");
    out.push_back({row.at("rank").get<int>(), *code, row.at("name").get<std::string>()});
  }
  validate_gdp_table(out);
  return out;
}

std::vector<GdpEntry> load_gdp_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read GDP table: " + file.string());
  return gdp_table_from_json(nlohmann::json::parse(in));
}

ExposureReport build_report(const std::vector<ExposureRecord>& records, const std::vector<GdpEntry>& gdp_table) {
  validate_gdp_table(gdp_table);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : records) ++counts[r.country];

  ExposureReport report;
  std::vector<GdpEntry> ordered = gdp_table;
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  for (const auto& e : ordered) {
    std::uint64_t n = 0;
    if (auto it = counts.find(e.code); it != counts.end()) {
      n = it->second;
      counts.erase(it);
    }
    report.rows.push_back({e.rank, e.code, e.name, n});
    report.total += n;
  }
  std::uint64_t other = 0;
  for (const auto& [code, n] : counts) other += n;
  if (other > 0) {
    report.rows.push_back({static_cast<int>(ordered.size()) + 1, std::string(kOtherCode), std::string(kOtherCode), other});
    report.total += other;
  }
  return report;
}

std::string group_digits(std::uint64_t value, char thousands) {
  std::string digits = std::to_string(value);
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (i - lead) % 3 == 0 && (i >= lead)) out.push_back(thousands);
    out.push_back(digits[i]);
  }
  return out;
}

std::string render_text(const ExposureReport& report, char thousands) {
  const std::string h_rank = "GDP";
  const std::string h_country = "Country";
  const std::string h_count = "IPs with responding 9100 port";
  std::size_t w_rank = h_rank.size();
  std::size_t w_country = h_country.size();
  std::size_t w_count = h_count.size();
  for (const auto& r : report.rows) {
    w_rank = std::max(w_rank, std::to_string(r.gdp_rank).size());
    w_country = std::max(w_country, r.country_name.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w_rank)) << h_rank << "  " << std::setw(static_cast<int>(w_country))
     << h_country << "  " << std::right << std::setw(static_cast<int>(w_count)) << h_count << '\n';
  os << std::string(w_rank + w_country + w_count + 4, '-') << '\n';
  for (const auto& r : report.rows) {
    const std::string rank = r.country_code == kOtherCode ? "-" : std::to_string(r.gdp_rank);
    os << std::left << std::setw(static_cast<int>(w_rank)) << rank << "  " << std::setw(static_cast<int>(w_country))
       << r.country_name << "  " << std::right << std::setw(static_cast<int>(w_count))
       << group_digits(r.ip_count, thousands) << '\n';
  }
  os << std::string(w_rank + w_country + w_count + 4, '-') << '\n';
  os << std::left << std::setw(static_cast<int>(w_rank + w_country + 2)) << "Total" << "  " << std::right
     << std::setw(static_cast<int>(w_count)) << group_digits(report.total, thousands) << '\n';
  return os.str();
}

nlohmann::json to_json(const ExposureReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"gdp_rank", r.gdp_rank}, {"country_code", r.country_code}, {"country_name", r.country_name},
                    {"ip_count", r.ip_count}});
  }
  return {{"rows", rows}, {"total", report.total}};
}

ExposureReport report_from_json(const nlohmann::json& j) {
  ExposureReport report;
  for (const auto& row : j.at("rows")) {
    report.rows.push_back({row.at("gdp_rank").get<int>(), row.at("country_code").get<std::string>(),
                           row.at("country_name").get<std::string>(), row.at("ip_count").get<std::uint64_t>()});
  }
  report.total = j.at("total").get<std::uint64_t>();
  std::uint64_t sum = 0;
  for (const auto& r : report.rows) sum += r.ip_count;
  if (sum != report.total) throw std::invalid_argument("report total does not match its rows");
  return report;
}

std::int64_t cve_summary(std::int64_t printer_kw, std::int64_t printers_kw, std::int64_t overlap) {
  if (printer_kw < 0 || printers_kw < 0 || overlap < 0) throw std::invalid_argument("CVE counts must be non-negative");
  if (overlap > std::min(printer_kw, printers_kw)) {
    throw std::invalid_argument("overlap " + std::to_string(overlap) + " exceeds the smaller keyword count");
  }
  return printer_kw + printers_kw - overlap;
}

}  // namespace printjack::exposure

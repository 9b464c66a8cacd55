#include "printjack/pjl.hpp"

#include <array>
#include <utility>

namespace printjack::pjl {
namespace {

constexpr std::string_view kSetPrefix = "@PJL SET ";
constexpr std::string_view kModelPrefix = "@PJL MODEL=";

using Field = std::optional<std::string> JobMetadata::*;

constexpr std::array<std::pair<std::string_view, Field>, 4> kSetKeys{{
    {"USERNAME", &JobMetadata::username},
    {"USERID", &JobMetadata::userid},
    {"HOSTID", &JobMetadata::hostid},
    {"JOBNAME", &JobMetadata::jobname},
}};

void apply_line(std::string_view line, JobMetadata& out) {
  if (line.starts_with(kModelPrefix)) {
    out.printer_model = std::string(line.substr(kModelPrefix.size()));
    return;
  }
  if (!line.starts_with(kSetPrefix)) return;
  std::string_view rest = line.substr(kSetPrefix.size());
  const auto eq = rest.find('=');
  if (eq == std::string_view::npos) return;
  const std::string_view key = rest.substr(0, eq);
  for (const auto& [name, field] : kSetKeys) {
    if (key == name) {
      out.*field = std::string(rest.substr(eq + 1));
      return;
    }
  }
}

}  // namespace

std::string format_set_lines(const JobMetadata& metadata) {
  std::string out;
  for (const auto& [name, field] : kSetKeys) {
    if (const auto& value = metadata.*field) {
      out.append(kSetPrefix).append(name).append("=").append(*value).append("\n");
    }
  }
  return out;
}

std::string format_model_line(std::string_view model) {
  std::string out(kModelPrefix);
  out.append(model).append("\n");
  return out;
}

JobMetadata extract_metadata(std::string_view payload) noexcept {
  JobMetadata out;
  try {
    std::size_t start = 0;
    while (start < payload.size()) {
      std::size_t end = payload.find('\n', start);
      if (end == std::string_view::npos) end = payload.size();
      apply_line(payload.substr(start, end - start), out);
      start = end + 1;
    }
  } catch (...) {
    // allocation failure only; report what was observed so far
  }
  return out;
}

JobMetadata merge(JobMetadata base, const JobMetadata& newer) {
  for (const auto& [name, field] : kSetKeys) {
    if (newer.*field) base.*field = newer.*field;
  }
  if (newer.printer_model) base.printer_model = newer.printer_model;
  return base;
}

nlohmann::json to_json(const JobMetadata& metadata) {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
  };
  put("username", metadata.username);
  put("userid", metadata.userid);
  put("hostid", metadata.hostid);
  put("jobname", metadata.jobname);
  put("printer_model", metadata.printer_model);
  return j;
}

JobMetadata metadata_from_json(const nlohmann::json& j) {
  JobMetadata m;
  auto get = [&](const char* key, std::optional<std::string>& v) {
    if (j.contains(key)) v = j.at(key).get<std::string>();
  };
  get("username", m.username);
  get("userid", m.userid);
  get("hostid", m.hostid);
  get("jobname", m.jobname);
  get("printer_model", m.printer_model);
  return m;
}

}  // namespace printjack::pjl

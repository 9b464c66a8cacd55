#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

// Line codec for the emulated control channel. Every line is LF-terminated:
//
//   @PJL SET USERNAME=<value>
//   @PJL SET USERID=<value>
//   @PJL SET HOSTID=<value>
//   @PJL SET JOBNAME=<value>
//   @PJL MODEL=<model>            (printer -> client)
//   @PJL INFO STATUS=<engine> REJECTED=<n>   (printer -> client)
//
// Clients write SET lines in the fixed key order above. The first '=' after
// the key splits key from value, so values may themselves contain '='.
namespace printjack::pjl {

struct JobMetadata {
  std::optional<std::string> username;
  std::optional<std::string> userid;
  std::optional<std::string> hostid;
  std::optional<std::string> jobname;
  std::optional<std::string> printer_model;

  bool empty() const noexcept {
    return !username && !userid && !hostid && !jobname && !printer_model;
  }
  friend bool operator==(const JobMetadata&, const JobMetadata&) = default;
};

/// SET lines for every present user field, in USERNAME, USERID, HOSTID,
/// JOBNAME order. printer_model is not emitted; the printer announces it.
std::string format_set_lines(const JobMetadata& metadata);

std::string format_model_line(std::string_view model);

/// Parses SET and MODEL lines out of arbitrary bytes. Unknown keys and
/// malformed lines are skipped; the last occurrence of a key wins. Never throws.
JobMetadata extract_metadata(std::string_view payload) noexcept;

/// Merges `newer` over `base`, field by field.
JobMetadata merge(JobMetadata base, const JobMetadata& newer);

nlohmann::json to_json(const JobMetadata& metadata);
JobMetadata metadata_from_json(const nlohmann::json& j);

}  // namespace printjack::pjl

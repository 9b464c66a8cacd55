#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

// Qualitative risk evaluation on the ISO/IEC 27005:2018 likelihood x impact
// grid, plus the three verdicts assigned to the Printjack attacks.
namespace printjack::risk {

enum class Likelihood { Rare, Unlikely, Possible, Likely, AlmostCertain };
enum class Impact { Minor, Moderate, Major, Severe, Catastrophic };
enum class RiskLevel { Low, Medium, High, Extreme };

enum class AttackId { Printjack1, Printjack2, Printjack3 };

inline constexpr std::array kLikelihoods{Likelihood::Rare, Likelihood::Unlikely, Likelihood::Possible,
                                         Likelihood::Likely, Likelihood::AlmostCertain};
inline constexpr std::array kImpacts{Impact::Minor, Impact::Moderate, Impact::Major, Impact::Severe,
                                     Impact::Catastrophic};
inline constexpr std::array kRiskLevels{RiskLevel::Low, RiskLevel::Medium, RiskLevel::High,
                                        RiskLevel::Extreme};

struct Assessment {
  AttackId attack_id;
  Likelihood likelihood;
  Impact impact;
  RiskLevel level;
  std::string rationale;

  friend bool operator==(const Assessment&, const Assessment&) = default;
};

/// Matrix lookup. Total over both enumerations.
RiskLevel risk_level(Likelihood likelihood, Impact impact) noexcept;

/// Verdicts for Printjack 1, 2 and 3, in that order.
const std::vector<Assessment>& paper_assessments();

/// Throws std::out_of_range for an unknown id (cannot happen for valid enums).
const Assessment& assessment_for(AttackId id);

std::string_view to_string(Likelihood v) noexcept;
std::string_view to_string(Impact v) noexcept;
std::string_view to_string(RiskLevel v) noexcept;
std::string_view to_string(AttackId v) noexcept;

std::optional<Likelihood> parse_likelihood(std::string_view text);
std::optional<Impact> parse_impact(std::string_view text);
std::optional<RiskLevel> parse_risk_level(std::string_view text);
std::optional<AttackId> parse_attack_id(std::string_view text);

nlohmann::json to_json(const Assessment& a);
Assessment assessment_from_json(const nlohmann::json& j);

/// One JSON object per line, LF-terminated.
std::string to_json_lines(const std::vector<Assessment>& assessments);

/// Renders the full grid as a text table. When `highlight` is given the
/// corresponding cell is bracketed, e.g. `[HIGH]`.
std::string render_matrix(std::optional<std::pair<Likelihood, Impact>> highlight = std::nullopt);

}  // namespace printjack::risk

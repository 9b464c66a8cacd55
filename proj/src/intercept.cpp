#include "printjack/intercept.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace printjack::intercept {
namespace {

using namespace std::chrono_literals;

constexpr std::string_view kPdfMagic = "%PDF-";

constexpr std::string_view kArt5 =
    "GDPR art. 5(1)(f) 'integrity and confidentiality': personal data processed without appropriate security";
constexpr std::string_view kArt83 =
    "GDPR art. 83: administrative fines up to EUR 20 000 000 or 4% of total worldwide annual turnover";

TimestampMs now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string to_hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit in capture sidecar");
  };
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex in capture sidecar");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  }
  return out;
}

std::string job_stem(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(id));
  return buf;
}

std::string quoted(const std::optional<std::string>& v) { return v ? "'" + *v + "'" : "(absent)"; }

}  // namespace

std::string_view to_string(Channel c) noexcept { return c == Channel::Data ? "DATA" : "CONTROL"; }

std::string_view to_string(DocumentFormat f) noexcept {
  switch (f) {
    case DocumentFormat::Pdf: return "PDF";
    case DocumentFormat::Plaintext: return "PLAINTEXT";
    case DocumentFormat::Binary: return "BINARY";
  }
  return "?";
}

std::string_view to_string(FindingKind k) noexcept {
  return k == FindingKind::Association ? "ASSOCIATION" : "CONTENT_BREACH";
}

pjl::JobMetadata job_metadata(const InterceptedJob& job) {
  return pjl::merge(pjl::extract_metadata(job.payload), pjl::extract_metadata(job.response));
}

double printable_ratio(std::string_view bytes) noexcept {
  if (bytes.empty()) return 0.0;
  const auto printable = std::count_if(bytes.begin(), bytes.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return (c >= 0x20 && c <= 0x7E) || c == '\t' || c == '\n' || c == '\r' || c == '\f';
  });
  return static_cast<double>(printable) / static_cast<double>(bytes.size());
}

DocumentSummary summarize(std::string_view bytes) noexcept {
  DocumentSummary s;
  s.byte_count = bytes.size();
  s.printable_ratio = printable_ratio(bytes);
  if (bytes.starts_with(kPdfMagic)) {
    s.format = DocumentFormat::Pdf;
  } else if (!bytes.empty() && s.printable_ratio >= kPlaintextThreshold) {
    s.format = DocumentFormat::Plaintext;
  } else {
    s.format = DocumentFormat::Binary;
  }
  return s;
}

Document reassemble_document(const InterceptedJob& job) {
  if (job.channel != Channel::Data) throw std::invalid_argument("reassemble_document needs a DATA channel job");
  return Document{job.payload, summarize(job.payload)};
}

std::vector<Finding> privacy_findings(const std::vector<InterceptedJob>& jobs) {
  std::vector<Finding> out;
  for (const auto& job : jobs) {
    const pjl::JobMetadata md = job_metadata(job);
    if (md.username && md.jobname) {
      out.push_back({FindingKind::Association, job.id, std::string(kArt5) + "; " + std::string(kArt83),
                     "job name " + quoted(md.jobname) + " linked to user " + quoted(md.username) + " (userid " +
                         quoted(md.userid) + ", host " + quoted(md.hostid) + ")"});
    }
    if (job.channel == Channel::Data) {
      const DocumentSummary s = summarize(job.payload);
      if (s.format != DocumentFormat::Binary) {
        std::ostringstream detail;
        detail << to_string(s.format) << " document of " << s.byte_count << " bytes recovered in cleartext from "
               << job.source.to_string() << " to " << job.destination.to_string();
        out.push_back({FindingKind::ContentBreach, job.id, std::string(kArt5) + "; " + std::string(kArt83),
                       detail.str()});
      }
    }
  }
  return out;
}

nlohmann::json to_json(const Finding& f) {
  return {{"kind", to_string(f.kind)}, {"job_id", f.job_id}, {"severity", f.severity}, {"detail", f.detail}};
}

nlohmann::json to_json(const DocumentSummary& s) {
  return {{"byte_count", s.byte_count}, {"printable_ratio", s.printable_ratio}, {"format", to_string(s.format)}};
}

nlohmann::json sidecar_json(const InterceptedJob& job) {
  nlohmann::json j{{"id", job.id},
                   {"source", job.source.to_string()},
                   {"destination", job.destination.to_string()},
                   {"channel", to_string(job.channel)},
                   {"started_at_ms", job.started_at},
                   {"ended_at_ms", job.ended_at},
                   {"payload_file", job_stem(job.id) + ".bin"},
                   {"response_hex", to_hex(job.response)},
                   {"metadata", pjl::to_json(job_metadata(job))}};
  if (job.channel == Channel::Data) j["summary"] = to_json(summarize(job.payload));
  if (job.upstream_error) j["upstream_error"] = *job.upstream_error;
  return j;
}

void write_capture(const std::filesystem::path& dir, const InterceptedJob& job) {
  std::filesystem::create_directories(dir);
  const std::string stem = job_stem(job.id);
  {
    std::ofstream bin(dir / (stem + ".bin"), std::ios::binary | std::ios::trunc);
    bin.write(job.payload.data(), static_cast<std::streamsize>(job.payload.size()));
    if (!bin) throw std::runtime_error("cannot write capture " + (dir / (stem + ".bin")).string());
  }
  std::ofstream side(dir / (stem + ".json"), std::ios::trunc);
  side << sidecar_json(job).dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  if (!side) throw std::runtime_error("cannot write capture sidecar in " + dir.string());
}

std::vector<InterceptedJob> load_captures(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("capture directory not found: " + dir.string());
  static const std::regex kSidecar(R"(job-\d+\.json)");
  std::vector<InterceptedJob> jobs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, kSidecar)) continue;
    std::ifstream in(entry.path());
    const nlohmann::json j = nlohmann::json::parse(in);
    InterceptedJob job;
    job.id = j.at("id").get<std::uint64_t>();
    job.source = net::parse_endpoint(j.at("source").get<std::string>());
    job.destination = net::parse_endpoint(j.at("destination").get<std::string>());
    job.channel = j.at("channel").get<std::string>() == "CONTROL" ? Channel::Control : Channel::Data;
    job.started_at = j.at("started_at_ms").get<TimestampMs>();
    job.ended_at = j.at("ended_at_ms").get<TimestampMs>();
    job.response = from_hex(j.value("response_hex", std::string{}));
    if (j.contains("upstream_error")) job.upstream_error = j.at("upstream_error").get<std::string>();
    std::ifstream bin(dir / j.at("payload_file").get<std::string>(), std::ios::binary);
    if (!bin) throw std::runtime_error("capture payload missing for " + name);
    std::ostringstream ss;
    ss << bin.rdbuf();
    job.payload = ss.str();
    jobs.push_back(std::move(job));
  }
  std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return jobs;
}

TapServer::TapServer(std::uint16_t listen_port, net::Endpoint upstream, TapOptions options)
    : upstream_(std::move(upstream)),
      options_(std::move(options)),
      listener_(options_.bind_host, listen_port),
      next_id_(options_.first_id) {
  net::check_target(upstream_, options_.policy);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

TapServer::~TapServer() { stop(); }

void TapServer::stop() {
  if (stopping_.exchange(true)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();
  std::unique_lock lock(mu_);
  for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
  cv_.wait(lock, [this] { return workers_ == 0; });
}

void TapServer::accept_loop() {
  while (!stopping_) {
    auto client = listener_.accept_for(50ms);
    if (!client) continue;
    {
      std::lock_guard lock(mu_);
      ++workers_;
    }
    std::thread([this, c = std::move(*client)]() mutable {
      relay(std::move(c));
      std::lock_guard lock(mu_);
      --workers_;
      cv_.notify_all();
    }).detach();
  }
}

void TapServer::relay(net::Socket client) {
  InterceptedJob job;
  job.id = next_id_++;
  job.source = client.peer();
  job.destination = upstream_;
  job.channel = options_.channel;
  job.started_at = now_ms();

  net::Socket up;
  try {
    up = net::connect_tcp(upstream_, options_.connect_timeout, options_.policy);
  } catch (const net::NetError& e) {
    std::lock_guard lock(mu_);
    events_.push_back("upstream " + upstream_.to_string() + " unreachable for " + job.source.to_string() + ": " +
                      e.what());
    return;  // client socket closes on scope exit
  }
  {
    std::lock_guard lock(mu_);
    live_fds_.insert(client.fd());
    live_fds_.insert(up.fd());
  }

  bool client_open = true;    // still reading client -> upstream
  bool upstream_open = true;  // still reading upstream -> client
  bool upstream_writable = true;
  bool client_writable = true;
  char buf[65536];

  while ((client_open || upstream_open) && !stopping_) {
    pollfd fds[2] = {{client_open ? client.fd() : -1, POLLIN, 0}, {upstream_open ? up.fd() : -1, POLLIN, 0}};
    const int rc = ::poll(fds, 2, static_cast<int>(options_.idle_timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) {
      job.upstream_error = rc == 0 ? "idle timeout" : "poll failed";
      break;
    }
    if (client_open && (fds[0].revents & (POLLIN | POLLHUP | POLLERR))) {
      const ssize_t n = ::recv(client.fd(), buf, sizeof buf, 0);
      if (n > 0) {
        job.payload.append(buf, static_cast<std::size_t>(n));
        if (upstream_writable) {
          try {
            up.send_all({buf, static_cast<std::size_t>(n)});
          } catch (const net::NetError& e) {
            // keep draining the client so the retained copy stays complete
            upstream_writable = false;
            job.upstream_error = std::string("upstream write failed: ") + e.what();
          }
        }
      } else if (n == 0 || errno != EINTR) {
        client_open = false;
        up.shutdown_write();
      }
    }
    if (upstream_open && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
      const ssize_t n = ::recv(up.fd(), buf, sizeof buf, 0);
      if (n > 0) {
        job.response.append(buf, static_cast<std::size_t>(n));
        if (client_writable) {
          try {
            client.send_all({buf, static_cast<std::size_t>(n)});
          } catch (const net::NetError&) {
            client_writable = false;
          }
        }
      } else if (n == 0 || errno != EINTR) {
        upstream_open = false;
        if (n < 0) {
          upstream_writable = false;
          if (!job.upstream_error) job.upstream_error = "upstream connection reset";
        }
        // Mirror the printer's close only once the client is done sending;
        // until then the client would see a premature EOF.
        if (!client_open) client.shutdown_write();
      }
    }
  }
  client.shutdown_write();
  job.ended_at = std::max(now_ms(), job.started_at);

  std::lock_guard lock(mu_);
  live_fds_.erase(client.fd());
  live_fds_.erase(up.fd());
  if (options_.capture_dir) {
    try {
      write_capture(*options_.capture_dir, job);
    } catch (const std::exception& e) {
      events_.push_back(std::string("capture write failed: ") + e.what());
    }
  }
  jobs_.push_back(std::move(job));
  cv_.notify_all();
}

std::vector<InterceptedJob> TapServer::jobs() const {
  std::lock_guard lock(mu_);
  return jobs_;
}

std::vector<std::string> TapServer::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

bool TapServer::wait_for_jobs(std::size_t count, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return jobs_.size() >= count; });
}

std::unique_ptr<TapServer> start_tap(std::uint16_t listen_port, net::Endpoint upstream, TapOptions options) {
  return std::make_unique<TapServer>(listen_port, std::move(upstream), std::move(options));
}

}  // namespace printjack::intercept

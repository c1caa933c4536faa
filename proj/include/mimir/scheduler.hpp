#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mimir/corpus.hpp"
#include "mimir/seeder.hpp"

namespace mimir {

struct FetchOutcome {
  enum class Kind { Response, Timeout, TransportError };
  Kind kind = Kind::TransportError;
  int status = 0;  // HTTP status when kind == Response
  std::string content_type;
  std::string body;
  double elapsed_ms = 0.0;
  bool media_skipped = false;
  bool truncated = false;

  bool ok() const { return kind == Kind::Response && status == 200; }
  static FetchOutcome timeout(double elapsed_ms = 0.0) { return {Kind::Timeout, 0, {}, {}, elapsed_ms}; }
  static FetchOutcome error(double elapsed_ms = 0.0) { return {Kind::TransportError, 0, {}, {}, elapsed_ms}; }
};

std::string_view to_string(FetchOutcome::Kind k);

// fetch() reports per-link failures as outcomes. Throwing Error(TransportFatal)
// means no further request can succeed and aborts the crawl.
class FetchTransport {
 public:
  virtual ~FetchTransport() = default;
  virtual FetchOutcome fetch(const std::string& url, std::chrono::milliseconds timeout) = 0;
};

// Scripted per-host answers, consumed one token per request: "ok", "timeout",
// "503" (or any status code), "error". Once a script runs out the host answers
// ok when it has a page and with an error otherwise.
class MemoryTransport : public FetchTransport {
 public:
  void add_page(const std::string& host, std::string html, std::string content_type = "text/html");
  void set_schedule(const std::string& host, std::vector<std::string> tokens);
  FetchOutcome fetch(const std::string& url, std::chrono::milliseconds timeout) override;
  std::size_t requests(const std::string& host) const;

 private:
  struct Entry {
    std::optional<std::string> html;
    std::string content_type = "text/html";
    std::vector<std::string> schedule;
    std::size_t served = 0;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> hosts_;
};

// Serves <root>/corpus/<host>/index.html with the optional schedule
// <root>/corpus/<host>.schedule and content type <root>/corpus/<host>/content-type.
// Unknown hosts answer with a transport error.
class FixtureTransport : public FetchTransport {
 public:
  explicit FixtureTransport(std::filesystem::path root);
  FetchOutcome fetch(const std::string& url, std::chrono::milliseconds timeout) override;

 private:
  std::filesystem::path corpus_;
  std::mutex mu_;
  std::map<std::string, std::size_t> served_;
};

// HTTP through a SOCKS5 (socks5h://host:port, the default for bare host:port)
// or HTTP proxy, via libcurl. Bodies beyond max_body bytes are truncated.
class ProxyTransport : public FetchTransport {
 public:
  explicit ProxyTransport(std::string endpoint, std::size_t max_body = 2 << 20);
  FetchOutcome fetch(const std::string& url, std::chrono::milliseconds timeout) override;

  // MIMIR_PROXY when set, `fallback` otherwise.
  static std::string endpoint_from_env(const std::string& fallback);

 private:
  std::string proxy_;
  std::size_t max_body_;
};

bool is_textual_content_type(std::string_view content_type);

// Drops non-textual bodies and flags them as media_skipped. Throws
// Error(InvalidConfig) for a non-positive timeout.
FetchOutcome fetch_textonly(FetchTransport& transport, const std::string& url, std::chrono::milliseconds timeout);

struct Window {
  std::vector<std::string> links;
  std::vector<std::optional<FetchOutcome>> outcomes;
  bool complete() const;
};

class TodoList {
 public:
  // False when the host was enqueued before.
  bool enqueue(const std::string& host);
  // Marks a host as known without queueing it (resumed, already settled).
  void remember(const std::string& host) { seen_.insert(host); }
  // Puts a failed host at the back for another attempt.
  void requeue(const std::string& host);

  // The next up-to-n hosts in FIFO order. They stay queued until complete()
  // is called with the filled window. Error(EmptyQueue) when nothing is
  // queued, Error(ContractViolation) while a window is pending.
  Window next_window(std::size_t n);
  void complete(const Window& w);

  bool empty() const { return queue_.empty(); }
  bool pending() const { return pending_; }
  std::size_t size() const { return queue_.size(); }
  const std::set<std::string>& seen() const { return seen_; }
  const std::deque<std::string>& queue() const { return queue_; }

 private:
  std::deque<std::string> queue_;
  std::set<std::string> seen_;
  bool pending_ = false;
  std::size_t pending_size_ = 0;
};

struct CrawlConfig {
  std::size_t workers = 4;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = kMaxAttempts;
  // Epoch seconds for record timestamps, called once per window. Unset means
  // a logical clock that advances one second per window.
  std::function<std::int64_t()> clock;
  std::int64_t logical_epoch = 1640995200;  // 2022-01-01 00:00:00 UTC
};

struct CrawlResult {
  std::vector<PageRecord> records;  // order of first discovery
  std::vector<std::vector<std::string>> windows;  // hosts of every window, in order
  std::size_t surface_fetched = 0;
  bool aborted = false;  // TransportFatal; Pending records can be resumed
  std::string abort_reason;
};

// Seeds whose host is not an onion address are surface seeds: fetched once,
// their onion links enqueued with the surface host recorded in referenced_by.
// `resume` carries records from an earlier, aborted crawl.
CrawlResult run_crawl(const std::vector<Seed>& seeds, FetchTransport& transport, const CrawlConfig& config,
                      const std::vector<PageRecord>& resume = {});

// Minimum link distance from any seed (depth 0) or from any surface referrer
// (depth 1), following ExternalOnion links of fetched pages.
void assign_depths(std::vector<PageRecord>& records, const std::set<std::string>& seeds);

}  // namespace mimir

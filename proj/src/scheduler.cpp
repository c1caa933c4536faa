#include "mimir/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <curl/curl.h>
#include <spdlog/spdlog.h>

#include "mimir/error.hpp"
#include "mimir/extractor.hpp"

namespace mimir {

std::string_view to_string(FetchOutcome::Kind k) {
  switch (k) {
    case FetchOutcome::Kind::Response: return "response";
    case FetchOutcome::Kind::Timeout: return "timeout";
    case FetchOutcome::Kind::TransportError: return "transport-error";
  }
  return "?";
}

namespace {

std::string host_from_url(const std::string& url) {
  auto n = normalize_url(url);
  if (const auto* onion = std::get_if<OnionAddress>(&n)) return onion->host;
  return std::get<SurfaceHost>(n).host;
}

// Shared by the scripted transports.
FetchOutcome scripted(const std::string& token, const std::optional<std::string>& html, const std::string& content_type) {
  if (token == "timeout") return FetchOutcome::timeout();
  if (token == "error") return FetchOutcome::error();
  if (token == "ok") {
    if (!html) return FetchOutcome::error();
    return {FetchOutcome::Kind::Response, 200, content_type, *html};
  }
  int status = 0;
  try {
    status = std::stoi(token);
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, "bad schedule token: " + token);
  }
  return {FetchOutcome::Kind::Response, status, "text/html", {}};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void MemoryTransport::add_page(const std::string& host, std::string html, std::string content_type) {
  std::lock_guard lock(mu_);
  hosts_[host].html = std::move(html);
  hosts_[host].content_type = std::move(content_type);
}

void MemoryTransport::set_schedule(const std::string& host, std::vector<std::string> tokens) {
  std::lock_guard lock(mu_);
  hosts_[host].schedule = std::move(tokens);
}

std::size_t MemoryTransport::requests(const std::string& host) const {
  std::lock_guard lock(mu_);
  auto it = hosts_.find(host);
  return it == hosts_.end() ? 0 : it->second.served;
}

FetchOutcome MemoryTransport::fetch(const std::string& url, std::chrono::milliseconds) {
  std::lock_guard lock(mu_);
  Entry& e = hosts_[host_from_url(url)];
  std::size_t n = e.served++;
  std::string token = n < e.schedule.size() ? e.schedule[n] : "ok";
  return scripted(token, e.html, e.content_type);
}

FixtureTransport::FixtureTransport(std::filesystem::path root) : corpus_(std::move(root) / "corpus") {
  if (!std::filesystem::is_directory(corpus_)) {
    throw Error(ErrorCode::IoError, "fixture has no corpus directory: " + corpus_.string());
  }
}

FetchOutcome FixtureTransport::fetch(const std::string& url, std::chrono::milliseconds) {
  const std::string host = host_from_url(url);
  const auto page = corpus_ / host / "index.html";
  std::size_t n;
  {
    std::lock_guard lock(mu_);
    n = served_[host]++;
  }
  std::string token = "ok";
  if (std::ifstream sched(corpus_ / (host + ".schedule")); sched) {
    std::vector<std::string> tokens;
    for (std::string t; sched >> t;) tokens.push_back(t);
    if (n < tokens.size()) token = tokens[n];
  }
  std::optional<std::string> html;
  if (std::filesystem::is_regular_file(page)) html = read_file(page);
  std::string content_type = "text/html";
  if (auto ct = corpus_ / host / "content-type"; std::filesystem::is_regular_file(ct)) {
    content_type = read_file(ct);
    while (!content_type.empty() && std::isspace(static_cast<unsigned char>(content_type.back()))) content_type.pop_back();
  }
  return scripted(token, html, content_type);
}

namespace {

struct CurlGlobal {
  CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
  ~CurlGlobal() { curl_global_cleanup(); }
};

struct Sink {
  std::string* body;
  std::size_t cap;
  bool truncated = false;
};

std::size_t on_body(char* data, std::size_t size, std::size_t n, void* user) {
  auto* sink = static_cast<Sink*>(user);
  std::size_t bytes = size * n;
  std::size_t room = sink->cap - std::min(sink->cap, sink->body->size());
  if (bytes > room) sink->truncated = true;
  sink->body->append(data, std::min(bytes, room));
  return bytes;
}

}  // namespace

ProxyTransport::ProxyTransport(std::string endpoint, std::size_t max_body) : max_body_(max_body) {
  static CurlGlobal global;
  if (endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "proxy endpoint is empty");
  proxy_ = endpoint.find("://") == std::string::npos ? "socks5h://" + endpoint : std::move(endpoint);
}

std::string ProxyTransport::endpoint_from_env(const std::string& fallback) {
  const char* env = std::getenv("MIMIR_PROXY");
  return env && *env ? std::string(env) : fallback;
}

FetchOutcome ProxyTransport::fetch(const std::string& url, std::chrono::milliseconds timeout) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw Error(ErrorCode::TransportFatal, "libcurl initialisation failed");
  FetchOutcome out;
  Sink sink{&out.body, max_body_};
  std::string target = url.find("://") == std::string::npos ? "http://" + url + "/" : url;
  curl_easy_setopt(curl.get(), CURLOPT_URL, target.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_PROXY, proxy_.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(timeout.count()));
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 0L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, on_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &sink);
  curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "Mozilla/5.0 (Windows NT 10.0; rv:102.0) Gecko/20100101 Firefox/102.0");

  auto start = std::chrono::steady_clock::now();
  CURLcode rc = curl_easy_perform(curl.get());
  out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.truncated = sink.truncated;
  switch (rc) {
    case CURLE_OK: break;
    case CURLE_OPERATION_TIMEDOUT: return FetchOutcome::timeout(out.elapsed_ms);
    case CURLE_COULDNT_RESOLVE_PROXY:
    case CURLE_COULDNT_CONNECT:
      throw Error(ErrorCode::TransportFatal, std::string("proxy unavailable: ") + curl_easy_strerror(rc));
    default: return FetchOutcome::error(out.elapsed_ms);
  }
  long status = 0;
  char* ct = nullptr;
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
  curl_easy_getinfo(curl.get(), CURLINFO_CONTENT_TYPE, &ct);
  out.kind = FetchOutcome::Kind::Response;
  out.status = static_cast<int>(status);
  out.content_type = ct ? ct : "";
  return out;
}

bool is_textual_content_type(std::string_view ct) {
  std::string t(ct.substr(0, ct.find(';')));
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  while (!t.empty() && t.back() == ' ') t.pop_back();
  while (!t.empty() && t.front() == ' ') t.erase(t.begin());
  if (t.empty()) return true;  // servers that omit the header almost always send HTML
  return t.starts_with("text/") || t.ends_with("+xml") || t.starts_with("application/xhtml") ||
         t == "application/json" || t == "application/xml";
}

FetchOutcome fetch_textonly(FetchTransport& transport, const std::string& url, std::chrono::milliseconds timeout) {
  if (timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
  FetchOutcome out = transport.fetch(url, timeout);
  if (out.kind == FetchOutcome::Kind::Response && !is_textual_content_type(out.content_type)) {
    out.body.clear();
    out.body.shrink_to_fit();
    out.media_skipped = true;
  }
  if (out.kind == FetchOutcome::Kind::Response && out.status != 200) out.body.clear();
  return out;
}

bool Window::complete() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.has_value(); });
}

bool TodoList::enqueue(const std::string& host) {
  if (!seen_.insert(host).second) return false;
  queue_.push_back(host);
  return true;
}

void TodoList::requeue(const std::string& host) {
  seen_.insert(host);
  queue_.push_back(host);
}

Window TodoList::next_window(std::size_t n) {
  if (pending_) throw Error(ErrorCode::ContractViolation, "a window is still pending");
  if (queue_.empty()) throw Error(ErrorCode::EmptyQueue, "the to-do list is empty");
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "window size must be at least 1");
  Window w;
  std::size_t take = std::min(n, queue_.size());
  w.links.assign(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(take));
  w.outcomes.resize(take);
  pending_ = true;
  pending_size_ = take;
  return w;
}

void TodoList::complete(const Window& w) {
  if (!pending_) throw Error(ErrorCode::ContractViolation, "no window is pending");
  if (w.links.size() != pending_size_ || !std::equal(w.links.begin(), w.links.end(), queue_.begin())) {
    throw Error(ErrorCode::ContractViolation, "window does not match the pending one");
  }
  if (!w.complete()) throw Error(ErrorCode::ContractViolation, "window has links without an outcome");
  queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(pending_size_));
  pending_ = false;
  pending_size_ = 0;
}

namespace {

bool is_onion_host(std::string_view host) { return host.ends_with(".onion"); }

class Crawler {
 public:
  Crawler(FetchTransport& transport, const CrawlConfig& config) : transport_(transport), config_(config) {}

  CrawlResult run(const std::vector<Seed>& seeds, const std::vector<PageRecord>& resume) {
    for (const auto& r : resume) {
      index_.emplace(r.url.host, result_.records.size());
      result_.records.push_back(r);
      if (r.status.state == CrawlState::Pending) {
        todo_.enqueue(r.url.host);
      } else {
        todo_.remember(r.url.host);
      }
    }
    std::vector<std::string> surface;
    for (const auto& s : seeds) {
      if (!is_onion_host(s.host)) {
        surface.push_back(s.host);
        continue;
      }
      seed_hosts_.insert(s.host);
      if (!index_.contains(s.host)) discover(s.host, std::nullopt);
    }
    for (const auto& host : surface) fetch_surface(host);

    crawl_windows();
    assign_depths(result_.records, seed_hosts_);
    return std::move(result_);
  }

 private:
  struct Slot {
    std::optional<FetchOutcome> outcome;
    std::optional<ExtractedPage> page;
  };

  std::int64_t now() {
    if (config_.clock) return config_.clock();
    return config_.logical_epoch + static_cast<std::int64_t>(tick_++);
  }

  PageRecord& record(const std::string& host) { return result_.records[index_.at(host)]; }

  void discover(const std::string& host, const std::optional<std::string>& referrer) {
    auto it = index_.find(host);
    if (it == index_.end()) {
      PageRecord r;
      r.url = OnionAddress{host, classify_onion_label(host.substr(0, host.find('.')))};
      r.depth = referrer ? record_depth(*referrer) + 1 : 0;
      index_.emplace(host, result_.records.size());
      result_.records.push_back(std::move(r));
      todo_.enqueue(host);
    }
    if (referrer) record(host).referenced_by.insert(*referrer);
  }

  int record_depth(const std::string& host) {
    auto it = index_.find(host);
    return it == index_.end() ? 0 : result_.records[it->second].depth;
  }

  void fetch_surface(const std::string& host) {
    FetchOutcome out;
    try {
      out = fetch_textonly(transport_, "https://" + host + "/", config_.timeout);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TransportFatal) throw;
      spdlog::warn("surface seed {} failed: {}", host, e.what());
      return;
    }
    ++result_.surface_fetched;
    if (!out.ok()) {
      spdlog::warn("surface seed {} answered {}", host, to_string(out.kind));
      return;
    }
    for (const auto& link : extract_links(out.body, OnionAddress{host, OnionVersion::Malformed})) {
      if (link.kind != LinkClass::ExternalOnion) continue;
      std::string target = onion_host_of(link.url);
      if (target.empty()) continue;
      if (!index_.contains(target)) {
        discover(target, std::nullopt);
        record(target).depth = 1;
      }
      record(target).referenced_by.insert(host);
    }
  }

  void crawl_windows() {
    const std::size_t n = config_.workers;
    std::vector<Slot> slots(n);
    Window window;
    bool done = false;
    std::atomic<bool> fatal{false};
    std::mutex fatal_mu;

    auto prepare = [&] {
      if (todo_.empty() || fatal) {
        done = true;
        return;
      }
      window = todo_.next_window(n);
      result_.windows.push_back(window.links);
      for (auto& s : slots) s = Slot{};
    };

    auto settle = [&]() noexcept {
      const std::string stamp = format_timestamp(now());
      std::vector<std::string> retry;
      for (std::size_t i = 0; i < window.links.size(); ++i) {
        if (!slots[i].outcome) continue;  // interrupted by a fatal transport error
        const std::string& host = window.links[i];
        const FetchOutcome& out = *slots[i].outcome;
        window.outcomes[i] = out;
        PageRecord& r = record(host);
        ++r.status.attempts;
        r.timestamps.push_back(stamp);
        if (out.ok()) {
          r.status.state = CrawlState::Fetched;
          absorb(host, out, slots[i].page);
        } else if (r.status.attempts >= config_.max_attempts) {
          r.status.state = CrawlState::Unreachable;
        } else {
          retry.push_back(host);
        }
      }
      if (fatal) {
        done = true;
        return;
      }
      todo_.complete(window);
      for (const auto& h : retry) todo_.requeue(h);
      prepare();
    };

    prepare();
    if (done) return;
    std::barrier sync(static_cast<std::ptrdiff_t>(n), settle);
    auto worker = [&](std::size_t i) {
      while (!done) {
        if (i < window.links.size()) {
          const std::string& host = window.links[i];
          try {
            FetchOutcome out = fetch_textonly(transport_, "http://" + host + "/", config_.timeout);
            if (out.ok() && !out.body.empty()) {
              slots[i].page = extract_page(out.body, record_view(host));
            }
            slots[i].outcome = std::move(out);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::TransportFatal) {
              std::lock_guard lock(fatal_mu);
              if (!fatal.exchange(true)) result_.abort_reason = e.what();
            } else {
              slots[i].outcome = FetchOutcome::error();
            }
          } catch (const std::exception& e) {
            spdlog::warn("fetch of {} failed: {}", host, e.what());
            slots[i].outcome = FetchOutcome::error();
          }
        }
        sync.arrive_and_wait();
      }
    };
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n; ++i) threads.emplace_back(worker, i);
    worker(0);
    for (auto& t : threads) t.join();
    result_.aborted = fatal;
  }

  // Read-only view used by workers; records are not resized while a window runs.
  const OnionAddress& record_view(const std::string& host) const { return result_.records[index_.at(host)].url; }

  void absorb(const std::string& host, const FetchOutcome& out, const std::optional<ExtractedPage>& page) {
    PageRecord& r = record(host);
    r.html = out.body;
    if (out.media_skipped) r.metadata["media_skipped"] = "true";
    if (out.truncated) r.metadata["truncated"] = "true";
    if (!page) {
      r.languages = {"und"};
      return;
    }
    for (const auto& [k, v] : page->metadata) r.metadata[k] = v;
    r.link_list = page->links;
    r.languages.clear();
    for (const auto& l : page->languages) r.languages.push_back(l.code);
    if (r.languages.empty()) r.languages.push_back("und");
    const int depth = r.depth;
    for (const auto& link : page->links) {
      if (link.kind != LinkClass::ExternalOnion) continue;
      std::string target = onion_host_of(link.url);
      if (target.empty() || target == host) continue;
      bool fresh = !index_.contains(target);
      discover(target, host);
      if (fresh) record(target).depth = depth + 1;
    }
  }

  FetchTransport& transport_;
  const CrawlConfig& config_;
  CrawlResult result_;
  TodoList todo_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> seed_hosts_;
  std::uint64_t tick_ = 0;
};

}  // namespace

CrawlResult run_crawl(const std::vector<Seed>& seeds, FetchTransport& transport, const CrawlConfig& config,
                      const std::vector<PageRecord>& resume) {
  if (config.workers == 0) throw Error(ErrorCode::InvalidConfig, "at least one worker is required");
  if (config.max_attempts < 1) throw Error(ErrorCode::InvalidConfig, "max attempts must be at least 1");
  if (config.timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
  return Crawler(transport, config).run(seeds, resume);
}

void assign_depths(std::vector<PageRecord>& records, const std::set<std::string>& seeds) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].url.host, i);
  constexpr int kUnset = -1;
  std::vector<int> dist(records.size(), kUnset);

  // Seeds start at level 0, surface-linked pages at level 1.
  std::vector<std::vector<std::size_t>> levels(2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (seeds.contains(records[i].url.host)) {
      levels[0].push_back(i);
    } else if (std::any_of(records[i].referenced_by.begin(), records[i].referenced_by.end(),
                           [](const std::string& h) { return !is_onion_host(h); })) {
      levels[1].push_back(i);
    }
  }
  std::vector<bool> expanded(records.size(), false);
  for (std::size_t level = 0; level < levels.size(); ++level) {
    for (std::size_t k = 0; k < levels[level].size(); ++k) {
      const std::size_t u = levels[level][k];
      if (dist[u] == kUnset) dist[u] = static_cast<int>(level);
      if (expanded[u] || dist[u] != static_cast<int>(level)) continue;
      expanded[u] = true;
      if (records[u].status.state != CrawlState::Fetched) continue;
      for (const auto& link : records[u].link_list) {
        if (link.kind != LinkClass::ExternalOnion) continue;
        auto it = index.find(onion_host_of(link.url));
        if (it == index.end() || dist[it->second] != kUnset) continue;
        dist[it->second] = static_cast<int>(level) + 1;
        if (levels.size() < level + 2) levels.resize(level + 2);
        levels[level + 1].push_back(it->second);
      }
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (dist[i] != kUnset) records[i].depth = dist[i];
  }
}

}  // namespace mimir

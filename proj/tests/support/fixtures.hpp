#pragma once

// Test-only helpers: synthetic link graphs, instrumented transports and
// brute-force reference computations.

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mimir/scheduler.hpp"

namespace test {

// A well-formed v3 host made of one repeated letter.
inline std::string host(char c) { return std::string(56, c) + ".onion"; }

// A distinct v3 host per index.
inline std::string host_n(std::size_t i) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz234567";
  std::string label(56, 'a');
  for (std::size_t k = 0; k < 8; ++k, i /= 32) label[55 - k] = kAlphabet[i % 32];
  return label + ".onion";
}

struct LinkGraph {
  std::vector<std::string> hosts;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> out;
  std::vector<int> failures;  // scripted failures before the first success

  std::size_t add(const std::string& h) {
    index[h] = hosts.size();
    hosts.push_back(h);
    out.emplace_back();
    failures.push_back(0);
    return hosts.size() - 1;
  }
};

// `levels` levels below and including the root, `branching` children each.
inline LinkGraph tree_graph(int levels, std::size_t branching) {
  LinkGraph g;
  g.add(host_n(0));
  std::vector<std::size_t> frontier{0};
  for (int l = 1; l < levels; ++l) {
    std::vector<std::size_t> next;
    for (std::size_t parent : frontier) {
      for (std::size_t b = 0; b < branching; ++b) {
        std::size_t child = g.add(host_n(g.hosts.size()));
        g.out[parent].push_back(child);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  return g;
}

// Erdos-Renyi style digraph without self-loops.
inline LinkGraph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  LinkGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add(host_n(i));
  std::bernoulli_distribution edge(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && edge(rng)) g.out[i].push_back(j);
    }
  }
  return g;
}

inline std::string page_linking(const LinkGraph& g, std::size_t i) {
  std::string html = "<html><head><title>page " + std::to_string(i) + "</title></head><body><p>some text here</p>";
  for (std::size_t j : g.out[i]) html += "<a href=\"http://" + g.hosts[j] + "/\">next</a>\n";
  return html + "</body></html>";
}

// Each host serves a page linking its successors. With `rng`, a share
// `failing` of the hosts first fails 1..7 times (7 > the attempt budget).
inline std::unique_ptr<mimir::MemoryTransport> transport_for(LinkGraph& g, std::mt19937_64* rng = nullptr,
                                                             double failing = 0.0) {
  static const std::vector<std::string> kinds{"timeout", "503", "error", "404"};
  auto t = std::make_unique<mimir::MemoryTransport>();
  for (std::size_t i = 0; i < g.hosts.size(); ++i) {
    t->add_page(g.hosts[i], page_linking(g, i));
    if (rng && std::bernoulli_distribution(failing)(*rng)) {
      g.failures[i] = 1 + static_cast<int>((*rng)() % 7);
      std::vector<std::string> script;
      for (int k = 0; k < g.failures[i]; ++k) script.push_back(kinds[(*rng)() % kinds.size()]);
      t->set_schedule(g.hosts[i], script);
    }
  }
  return t;
}

// Link distance from the sources through pages that eventually load within
// the attempt budget; -1 when never discovered.
inline std::vector<int> bfs_depths(const LinkGraph& g, const std::vector<std::size_t>& sources, int max_attempts = 5) {
  std::vector<int> depth(g.hosts.size(), -1);
  std::queue<std::size_t> q;
  for (std::size_t s : sources) {
    depth[s] = 0;
    q.push(s);
  }
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    if (g.failures[u] >= max_attempts) continue;
    for (std::size_t v : g.out[u]) {
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        q.push(v);
      }
    }
  }
  return depth;
}

struct FetchEvent {
  bool start = true;
  std::string host;
};

// Logs every fetch start and end in one global order and sleeps a random
// few microseconds in between so that workers finish out of order.
class RecordingTransport : public mimir::FetchTransport {
 public:
  RecordingTransport(std::unique_ptr<mimir::MemoryTransport> inner, std::uint64_t seed)
      : inner_(std::move(inner)), seed_(seed) {}

  mimir::FetchOutcome fetch(const std::string& url, std::chrono::milliseconds timeout) override {
    const std::string h = mimir::onion_host_of(url);
    log({true, h});
    std::mt19937_64 jitter(seed_ ^ std::hash<std::string>{}(h) ^ calls_.fetch_add(1));
    std::this_thread::sleep_for(std::chrono::microseconds(jitter() % 200));
    auto out = inner_->fetch(url, timeout);
    log({false, h});
    return out;
  }

  std::vector<FetchEvent> events() const {
    std::lock_guard lock(mu_);
    return events_;
  }

 private:
  void log(FetchEvent e) {
    std::lock_guard lock(mu_);
    events_.push_back(std::move(e));
  }

  std::unique_ptr<mimir::MemoryTransport> inner_;
  std::uint64_t seed_;
  std::atomic<std::uint64_t> calls_{0};
  mutable std::mutex mu_;
  std::vector<FetchEvent> events_;
};

// True when no fetch of window w+1 starts before every fetch of window w has
// ended. The k-th fetch of a host belongs to the k-th window listing it.
inline bool barrier_holds(const std::vector<std::vector<std::string>>& windows, const std::vector<FetchEvent>& events) {
  std::map<std::string, std::vector<std::size_t>> window_of;
  std::vector<std::size_t> open(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    open[w] = windows[w].size();
    for (const auto& h : windows[w]) window_of[h].push_back(w);
  }
  std::map<std::string, std::size_t> starts, ends;
  std::size_t settled = 0;  // windows [0, settled) have fully ended
  for (const auto& e : events) {
    auto& seen = e.start ? starts[e.host] : ends[e.host];
    const auto& ws = window_of[e.host];
    if (seen >= ws.size()) return false;  // a fetch no window accounts for
    std::size_t w = ws[seen++];
    if (e.start) {
      if (w > settled) return false;
    } else {
      --open[w];
      while (settled < windows.size() && open[settled] == 0) ++settled;
    }
  }
  return settled == windows.size();
}

}  // namespace test

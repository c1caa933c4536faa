#include "mimir/seeder.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "mimir/classify.hpp"
#include "mimir/corpus.hpp"
#include "mimir/error.hpp"

namespace mimir {

std::vector<Keyword> extract_keywords(const std::vector<std::string>& titles, std::size_t k) {
  if (titles.empty()) throw Error(ErrorCode::EmptyCorpus, "no titles to extract keywords from");
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  std::vector<std::vector<std::string>> docs;
  docs.reserve(titles.size());
  for (const auto& t : titles) docs.push_back(preprocess(t));
  Vocabulary vocab = Vocabulary::fit(docs);
  if (vocab.size() == 0) throw Error(ErrorCode::EmptyCorpus, "titles contain no usable terms");

  std::vector<double> total(vocab.size(), 0.0);
  for (const auto& row : tfidf_vectorize(vocab, docs, TfIdfMode::Standard)) {
    for (auto [col, w] : row) total[col] += w;
  }
  std::vector<Keyword> ranked;
  ranked.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) ranked.push_back({vocab.terms[i], total[i]});
  std::sort(ranked.begin(), ranked.end(), [](const Keyword& a, const Keyword& b) {
    return a.score != b.score ? a.score > b.score : a.term < b.term;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

FixtureSearchClient::FixtureSearchClient(std::string name, std::filesystem::path root)
    : name_(std::move(name)), root_(std::move(root)) {}

std::vector<std::string> FixtureSearchClient::search(const std::string& term) {
  if (!std::filesystem::is_directory(root_)) {
    throw Error(ErrorCode::EngineError, name_ + ": no fixture directory " + root_.string());
  }
  std::vector<std::string> urls;
  std::ifstream in(root_ / term);
  if (!in) return urls;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) urls.push_back(line);
  }
  return urls;
}

EngineQueryResult query_engines(const std::vector<Keyword>& keywords,
                                const std::vector<std::shared_ptr<SearchClient>>& engines) {
  if (engines.empty()) throw Error(ErrorCode::InvalidConfig, "no search engine configured");

  struct Hit {
    std::string url, term;
  };
  std::vector<std::vector<Hit>> hits(engines.size());
  std::vector<std::size_t> errors(engines.size(), 0);
  std::vector<std::thread> threads;
  for (std::size_t e = 0; e < engines.size(); ++e) {
    threads.emplace_back([&, e] {
      for (const auto& kw : keywords) {
        try {
          for (auto& url : engines[e]->search(kw.term)) hits[e].push_back({std::move(url), kw.term});
        } catch (const Error& err) {
          spdlog::warn("engine {} failed on '{}': {}", engines[e]->name(), kw.term, err.what());
          ++errors[e];
        }
      }
    });
  }
  for (auto& t : threads) t.join();

  EngineQueryResult out;
  std::map<std::string, std::set<std::string>> by_host;
  for (std::size_t e = 0; e < engines.size(); ++e) {
    out.engine_errors += errors[e];
    for (const auto& h : hits[e]) {
      NormalizedUrl n;
      try {
        n = normalize_url(h.url);
      } catch (const Error&) {
        continue;
      }
      if (const auto* onion = std::get_if<OnionAddress>(&n)) {
        by_host[onion->host].insert(h.term);
      } else {
        ++out.surface_discarded;
      }
    }
  }
  if (out.surface_discarded) spdlog::warn("discarded {} surface results", out.surface_discarded);
  for (auto& [host, tags] : by_host) out.seeds.push_back({host, std::move(tags)});
  return out;
}

namespace {

std::string host_of(const std::string& raw) {
  auto n = normalize_url(raw);
  if (const auto* onion = std::get_if<OnionAddress>(&n)) return onion->host;
  return std::get<SurfaceHost>(n).host;
}

}  // namespace

std::vector<Seed> merge_seeds(const std::vector<Seed>& automatic, const std::vector<std::string>& manual) {
  std::map<std::string, std::set<std::string>> merged;
  for (const auto& s : automatic) merged[host_of(s.host)].insert(s.provenance.begin(), s.provenance.end());
  for (const auto& m : manual) merged[host_of(m)].insert("manual");
  std::vector<Seed> out;
  for (auto& [host, tags] : merged) out.push_back({host, std::move(tags)});
  return out;
}

void save_seeds(const std::vector<Seed>& seeds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# host\tprovenance\n";
  for (const auto& s : seeds) {
    out << s.host << '\t';
    bool first = true;
    for (const auto& t : s.provenance) {
      out << (first ? "" : ",") << t;
      first = false;
    }
    out << '\n';
  }
}

std::vector<Seed> load_seeds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::map<std::string, std::set<std::string>> merged;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    std::string host = host_of(line.substr(0, tab));
    std::set<std::string>& tags = merged[host];
    if (tab != std::string::npos) {
      std::stringstream ss(line.substr(tab + 1));
      std::string tag;
      while (std::getline(ss, tag, ',')) {
        if (!tag.empty()) tags.insert(tag);
      }
    }
    if (tags.empty()) tags.insert("manual");
  }
  std::vector<Seed> out;
  for (auto& [host, tags] : merged) out.push_back({host, std::move(tags)});
  return out;
}

}  // namespace mimir

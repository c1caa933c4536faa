#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace mimir {

struct Keyword {
  std::string term;
  double score = 0.0;
  friend bool operator==(const Keyword&, const Keyword&) = default;
};

struct Seed {
  std::string host;  // normalized onion host, or a surface host for user-given surface seeds
  std::set<std::string> provenance;
  friend bool operator==(const Seed&, const Seed&) = default;
};

// Top-k terms by tf-idf summed over the titles. Throws Error(EmptyCorpus).
std::vector<Keyword> extract_keywords(const std::vector<std::string>& titles, std::size_t k);

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  virtual std::string name() const = 0;
  // Throws Error(EngineError) when the engine cannot answer.
  virtual std::vector<std::string> search(const std::string& term) = 0;
};

// Reads <root>/<term>, one URL per line. A missing file is an empty answer;
// a missing root directory is an EngineError.
class FixtureSearchClient : public SearchClient {
 public:
  FixtureSearchClient(std::string name, std::filesystem::path root);
  std::string name() const override { return name_; }
  std::vector<std::string> search(const std::string& term) override;

 private:
  std::string name_;
  std::filesystem::path root_;
};

struct EngineQueryResult {
  std::vector<Seed> seeds;  // sorted by host
  std::size_t surface_discarded = 0;
  std::size_t engine_errors = 0;
};

// One thread per engine; results merged after every engine has answered.
EngineQueryResult query_engines(const std::vector<Keyword>& keywords,
                                const std::vector<std::shared_ptr<SearchClient>>& engines);

std::vector<Seed> merge_seeds(const std::vector<Seed>& automatic, const std::vector<std::string>& manual);

// "host<TAB>tag,tag" per line; '#' starts a comment line.
void save_seeds(const std::vector<Seed>& seeds, const std::filesystem::path& path);
std::vector<Seed> load_seeds(const std::filesystem::path& path);

}  // namespace mimir

#include "mimir/graph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mimir/classify.hpp"
#include "mimir/error.hpp"

namespace mimir {

std::size_t PageGraph::add_node(const std::string& host) {
  auto [it, fresh] = index_.emplace(host, nodes_.size());
  if (fresh) {
    PageNode n;
    n.host = host;
    n.language = "und";
    nodes_.push_back(std::move(n));
    out_.emplace_back();
    out_set_.emplace_back();
  }
  return it->second;
}

bool PageGraph::add_edge(std::size_t from, std::size_t to) {
  if (from == to || !out_set_.at(from).insert(to).second) return false;
  out_[from].push_back(to);
  ++edge_count_;
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> PageGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < out_.size(); ++u) {
    for (std::size_t v : out_[u]) out.emplace_back(u, v);
  }
  return out;
}

std::optional<std::size_t> PageGraph::resolve(const std::string& host) const {
  if (auto it = index_.find(host); it != index_.end()) return it->second;
  if (auto it = alias_.find(host); it != alias_.end()) return it->second;
  return std::nullopt;
}

namespace {

bool surface_referrer(const PageRecord& r) {
  return std::any_of(r.referenced_by.begin(), r.referenced_by.end(),
                     [](const std::string& h) { return !h.ends_with(".onion"); });
}

}  // namespace

PageGraph build_graph(const std::vector<PageRecord>& records, const MirrorClusters& clusters) {
  PageGraph g;
  auto rep_of = [&](const std::string& host) {
    auto it = clusters.representative.find(host);
    return it == clusters.representative.end() ? host : it->second;
  };

  std::set<std::size_t> sources;
  for (const auto& r : records) {
    const std::string& host = r.url.host;
    const bool clustered = clusters.representative.contains(host);
    std::size_t u = g.add_node(rep_of(host));
    PageNode& n = g.node(u);
    if (!clustered && r.status.state != CrawlState::Fetched) n.reachable = false;
    n.timestamps.insert(n.timestamps.end(), r.timestamps.begin(), r.timestamps.end());
    n.surface = n.surface || surface_referrer(r);
    if (r.is_seed()) sources.insert(u);
    if (host == rep_of(host)) {
      if (auto t = r.metadata.find("title"); t != r.metadata.end()) n.title = t->second;
      if (!r.languages.empty()) n.language = r.languages.front();
    } else {
      g.add_alias(host, u);
    }
  }
  for (const auto& [rep, members] : clusters.mirrors) {
    if (auto u = g.resolve(rep)) g.node(*u).mirrors = members;
  }

  for (const auto& r : records) {
    if (r.status.state != CrawlState::Fetched) continue;
    std::size_t u = *g.resolve(rep_of(r.url.host));
    for (const auto& link : r.link_list) {
      if (link.kind != LinkClass::ExternalOnion) continue;
      std::string target = onion_host_of(link.url);
      if (target.empty()) continue;
      auto v = g.resolve(rep_of(target));
      if (!v) {
        spdlog::debug("dangling link {} -> {}", r.url.host, target);
        v = g.add_node(target);
        g.node(*v).reachable = false;
      }
      g.add_edge(u, *v);
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) std::sort(g.node(i).timestamps.begin(), g.node(i).timestamps.end(),
                                                        [](const std::string& a, const std::string& b) {
                                                          return parse_timestamp(a) < parse_timestamp(b);
                                                        });
  assign_graph_depths(g, sources);
  return g;
}

void assign_graph_depths(PageGraph& g, const std::set<std::size_t>& sources) {
  std::vector<std::vector<std::size_t>> levels(2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.node(i).depth = -1;
    if (sources.contains(i)) {
      levels[0].push_back(i);
    } else if (g.node(i).surface) {
      levels[1].push_back(i);
    }
  }
  for (std::size_t level = 0; level < levels.size(); ++level) {
    for (std::size_t k = 0; k < levels[level].size(); ++k) {
      std::size_t u = levels[level][k];
      if (g.node(u).depth >= 0) continue;
      g.node(u).depth = static_cast<int>(level);
      for (std::size_t v : g.successors(u)) {
        if (g.node(v).depth >= 0) continue;
        if (levels.size() < level + 2) levels.resize(level + 2);
        levels[level + 1].push_back(v);
      }
    }
  }
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

}  // namespace

SubgraphReport weakly_connected_components(const PageGraph& g) {
  DisjointSets sets(g.size());
  for (auto [u, v] : g.edges()) sets.unite(u, v);
  std::map<std::size_t, std::size_t> slot;  // root -> component index
  SubgraphReport report;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto [it, fresh] = slot.emplace(sets.find(i), report.components.size());
    if (fresh) report.components.emplace_back();
    Component& c = report.components[it->second];
    c.nodes.push_back(i);
    c.surface_linked += g.node(i).surface;
  }
  for (auto [u, v] : g.edges()) ++report.components[slot.at(sets.find(u))].edges;
  std::stable_sort(report.components.begin(), report.components.end(),
                   [](const Component& a, const Component& b) { return a.nodes.size() > b.nodes.size(); });
  for (const auto& c : report.components) report.order_one += c.nodes.size() == 1;
  report.total_nodes = g.size();
  report.total_edges = g.edge_count();
  return report;
}

std::set<std::size_t> reachable_from(const PageGraph& g, const std::set<std::size_t>& start) {
  std::set<std::size_t> seen(start.begin(), start.end());
  std::vector<std::size_t> stack(start.begin(), start.end());
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : g.successors(u)) {
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen;
}

std::set<std::size_t> seed_nodes(const PageGraph& g, const std::vector<Seed>& seeds, const std::string& tag) {
  std::set<std::size_t> out;
  for (const auto& s : seeds) {
    bool selected = tag == kAllKeywords ? std::any_of(s.provenance.begin(), s.provenance.end(),
                                                      [](const std::string& t) { return t != "manual"; })
                                        : s.provenance.contains(tag);
    if (!selected) continue;
    if (auto n = g.resolve(s.host)) out.insert(*n);
  }
  return out;
}

AblationSets seed_ablation(const PageGraph& g, const std::vector<Seed>& seeds, const std::string& tag) {
  bool known = std::any_of(seeds.begin(), seeds.end(), [&](const Seed& s) {
    if (tag == kAllKeywords) {
      return std::any_of(s.provenance.begin(), s.provenance.end(), [](const std::string& t) { return t != "manual"; });
    }
    return s.provenance.contains(tag);
  });
  if (!known) throw Error(ErrorCode::UnknownTag, "no seed carries the tag '" + tag + "'");
  AblationSets out;
  out.ks = reachable_from(g, seed_nodes(g, seeds, tag));
  out.mss = reachable_from(g, seed_nodes(g, seeds, "manual"));
  std::set_difference(out.ks.begin(), out.ks.end(), out.mss.begin(), out.mss.end(), std::inserter(out.sd, out.sd.end()));
  return out;
}

ContributionTable contribution_table(const PageGraph& g, const std::vector<Seed>& seeds) {
  ContributionTable t;
  std::set<std::string> terms;
  for (const auto& s : seeds) {
    for (const auto& tag : s.provenance) {
      if (tag != "manual") terms.insert(tag);
    }
  }
  std::set<std::string> present;
  for (const auto& n : g.nodes()) present.insert(n.category.empty() ? "Unclassified" : n.category);
  for (const auto& c : default_classes()) {
    if (present.erase(c)) t.categories.push_back(c);
  }
  t.categories.insert(t.categories.end(), present.begin(), present.end());

  const double n = static_cast<double>(std::max<std::size_t>(g.size(), 1));
  auto pct = [&](std::size_t count) { return 100.0 * static_cast<double>(count) / n; };
  std::vector<AblationSets> sets;
  for (const auto& term : terms) {
    sets.push_back(seed_ablation(g, seeds, term));
    t.keywords.push_back(term);
    t.total.push_back(pct(sets.back().sd.size()));
  }
  t.cell.assign(t.categories.size(), std::vector<double>(t.keywords.size(), 0.0));
  t.tcc.assign(t.categories.size(), 0.0);
  for (std::size_t row = 0; row < t.categories.size(); ++row) {
    for (std::size_t col = 0; col < t.keywords.size(); ++col) {
      std::size_t count = std::count_if(sets[col].sd.begin(), sets[col].sd.end(), [&](std::size_t v) {
        const std::string& c = g.node(v).category;
        return (c.empty() ? "Unclassified" : c) == t.categories[row];
      });
      t.cell[row][col] = pct(count);
      t.tcc[row] += t.cell[row][col];
    }
  }
  if (!terms.empty()) {
    auto aks = seed_ablation(g, seeds, kAllKeywords);
    t.aks_over_mss = pct(aks.sd.size());
    std::size_t missing = std::count_if(aks.mss.begin(), aks.mss.end(), [&](std::size_t v) { return !aks.ks.contains(v); });
    t.mss_over_aks = pct(missing);
  }
  return t;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ";") + i;
  return out;
}

}  // namespace

std::string contribution_csv(const ContributionTable& t) {
  std::string out = "Category";
  for (const auto& k : t.keywords) out += "," + csv_field(k);
  out += ",TCC\n";
  for (std::size_t r = 0; r < t.categories.size(); ++r) {
    out += csv_field(t.categories[r]);
    for (double v : t.cell[r]) out += fmt::format(",{:.2f}", v);
    out += fmt::format(",{:.2f}\n", t.tcc[r]);
  }
  out += "AKS";
  for (double v : t.total) out += fmt::format(",{:.2f}", v);
  out += fmt::format(",{:.2f}\n", t.aks_over_mss);
  return out;
}

std::string edge_list(const PageGraph& g) {
  std::string out;
  for (auto [u, v] : g.edges()) out += g.node(u).host + "\t" + g.node(v).host + "\n";
  return out;
}

std::string node_csv(const PageGraph& g) {
  std::string out = "Host,Title,Language,Surface,Depth,Timestamp,Category,Has_Mirror,Mirrors,Reachable\n";
  for (const auto& n : g.nodes()) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", n.host, csv_field(n.title), n.language, n.surface, n.depth,
                       csv_field(joined(n.timestamps)), csv_field(n.category), n.has_mirror(), joined(n.mirrors),
                       n.reachable);
  }
  return out;
}

std::string components_csv(const SubgraphReport& report) {
  std::string out = "Component,Nodes,Edges,Surface\n";
  for (std::size_t i = 0; i < report.components.size(); ++i) {
    const auto& c = report.components[i];
    out += fmt::format("{},{},{},{}\n", i + 1, c.nodes.size(), c.edges, c.surface_linked);
  }
  std::size_t surface = 0;
  for (const auto& c : report.components) surface += c.surface_linked;
  out += fmt::format("Total,{},{},{}\n", report.total_nodes, report.total_edges, surface);
  out += fmt::format("Order-1 components,{},0,\n", report.order_one);
  return out;
}

}  // namespace mimir

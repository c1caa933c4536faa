#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mimir/corpus.hpp"
#include "mimir/mirror.hpp"
#include "mimir/seeder.hpp"

namespace mimir {

struct PageNode {
  std::string host;
  std::string title;
  std::string language;  // "und" when unknown
  bool surface = false;  // linked from a surface page
  int depth = -1;        // -1: no seed reaches it
  std::vector<std::string> timestamps;  // every attempt, all cluster members
  std::string category;
  std::vector<std::string> mirrors;
  bool reachable = true;  // false for link targets and seeds that never answered

  bool has_mirror() const { return !mirrors.empty(); }
};

class PageGraph {
 public:
  // Index of the node for `host`, creating it when absent.
  std::size_t add_node(const std::string& host);
  // Drops self-loops and parallel edges. Returns whether an edge was added.
  bool add_edge(std::size_t from, std::size_t to);

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const PageNode& node(std::size_t i) const { return nodes_[i]; }
  PageNode& node(std::size_t i) { return nodes_[i]; }
  const std::vector<PageNode>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& successors(std::size_t i) const { return out_[i]; }
  const std::set<std::size_t>& targets(std::size_t i) const { return out_set_[i]; }
  bool contains(const std::string& host) const { return index_.contains(host); }
  std::size_t index_of(const std::string& host) const { return index_.at(host); }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  // Mirrors resolve to their representative's node.
  void add_alias(const std::string& host, std::size_t node) { alias_[host] = node; }
  std::optional<std::size_t> resolve(const std::string& host) const;

 private:
  std::map<std::string, std::size_t> alias_;
  std::vector<PageNode> nodes_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::set<std::size_t>> out_set_;
  std::size_t edge_count_ = 0;
};

// One node per cluster representative; pages that never answered and link
// targets never crawled become unreachable nodes. Depth is the distance from
// the nearest seed (records at depth 0), with surface-linked nodes at most 1.
PageGraph build_graph(const std::vector<PageRecord>& records, const MirrorClusters& clusters);

// Multi-source BFS over the directed graph: depth 0 at `sources`, at most 1
// for surface-linked nodes.
void assign_graph_depths(PageGraph& graph, const std::set<std::size_t>& sources);

struct Component {
  std::vector<std::size_t> nodes;  // ascending
  std::size_t edges = 0;
  std::size_t surface_linked = 0;
};

struct SubgraphReport {
  std::vector<Component> components;  // by node count, descending; ties by lowest node
  std::size_t order_one = 0;
  std::size_t total_nodes = 0;
  std::size_t total_edges = 0;
};

SubgraphReport weakly_connected_components(const PageGraph& graph);

// Nodes reachable along directed edges from the given nodes (inclusive).
std::set<std::size_t> reachable_from(const PageGraph& graph, const std::set<std::size_t>& start);

// Graph nodes of the seeds carrying `tag`; a seed that is a mirror maps to its
// representative. The tag "*keywords" selects every seed with a keyword tag.
std::set<std::size_t> seed_nodes(const PageGraph& graph, const std::vector<Seed>& seeds, const std::string& tag);

inline constexpr const char* kAllKeywords = "*keywords";

struct AblationSets {
  std::set<std::size_t> ks;   // reachable from seeds tagged with the keyword
  std::set<std::size_t> mss;  // reachable from manual seeds
  std::set<std::size_t> sd;   // ks - mss
};

// Throws Error(UnknownTag) when no seed carries `tag`.
AblationSets seed_ablation(const PageGraph& graph, const std::vector<Seed>& seeds, const std::string& tag);

struct ContributionTable {
  std::vector<std::string> keywords;    // columns
  std::vector<std::string> categories;  // rows
  // cell[row][col]: percent of graph nodes in SD(keyword) with that category
  std::vector<std::vector<double>> cell;
  std::vector<double> total;  // per keyword: percent of graph nodes in SD(keyword)
  std::vector<double> tcc;    // per category: sum over keywords of its row
  double aks_over_mss = 0.0;  // percent of graph nodes in AKS - MSS
  double mss_over_aks = 0.0;  // percent of graph nodes in MSS - AKS
};

ContributionTable contribution_table(const PageGraph& graph, const std::vector<Seed>& seeds);
std::string contribution_csv(const ContributionTable& table);

// "src<TAB>dst" per edge.
std::string edge_list(const PageGraph& graph);
// Host,Title,Language,Surface,Depth,Timestamp,Category,Has_Mirror,Mirrors,Reachable;
// list-valued cells are joined with ';'.
std::string node_csv(const PageGraph& graph);
std::string components_csv(const SubgraphReport& report);

}  // namespace mimir

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mimir {

enum class OnionVersion { V2, V3, Malformed };

// Registrable .onion host, lowercase, e.g. "abcdefghijklmnop.onion".
struct OnionAddress {
  std::string host;
  OnionVersion version = OnionVersion::Malformed;

  // Label left of ".onion".
  std::string_view label() const;

  friend bool operator==(const OnionAddress&, const OnionAddress&) = default;
  friend auto operator<=>(const OnionAddress& a, const OnionAddress& b) { return a.host <=> b.host; }
};

// Any host whose top-level domain is not .onion.
struct SurfaceHost {
  std::string host;
  friend bool operator==(const SurfaceHost&, const SurfaceHost&) = default;
};

using NormalizedUrl = std::variant<OnionAddress, SurfaceHost>;

enum class LinkClass { Own, ExternalOnion, Surface };

enum class CrawlState { Pending, Fetched, Unreachable };

inline constexpr int kMaxAttempts = 5;

struct CrawlStatus {
  CrawlState state = CrawlState::Pending;
  int attempts = 0;
  friend bool operator==(const CrawlStatus&, const CrawlStatus&) = default;
};

struct Link {
  std::string url;
  LinkClass kind = LinkClass::Own;
  friend bool operator==(const Link&, const Link&) = default;
};

struct PageRecord {
  OnionAddress url;
  std::map<std::string, std::string> metadata;
  std::vector<Link> link_list;
  std::set<std::string> referenced_by;  // normalized onion hosts
  std::string html;                     // raw bytes
  std::vector<std::string> timestamps;  // "dd-MM-yy HH:mm:ss", UTC
  std::vector<std::string> languages;   // ISO-639-1, "und" fallback
  int depth = 0;
  CrawlStatus status;

  bool is_seed() const { return depth == 0; }

  friend bool operator==(const PageRecord&, const PageRecord&) = default;
};

std::string_view to_string(OnionVersion v);
std::string_view to_string(LinkClass k);
std::string_view to_string(CrawlState s);
OnionVersion parse_onion_version(std::string_view s);
LinkClass parse_link_class(std::string_view s);
CrawlState parse_crawl_state(std::string_view s);

OnionVersion classify_onion_label(std::string_view label);

// Strips scheme, userinfo, port, path, query and fragment; lowercases the host;
// reduces "sub.label.onion" to "label.onion". Throws Error(EmptyInput) on an
// empty or whitespace-only string.
NormalizedUrl normalize_url(std::string_view raw);

// Convenience: the onion host of `raw`, or empty when it is a surface URL.
std::string onion_host_of(std::string_view raw);

// Timestamps are kept as "dd-MM-yy HH:mm:ss" at the interface and compared as
// epoch seconds internally. Two-digit years map to 20yy.
std::string format_timestamp(std::int64_t epoch_seconds);
std::int64_t parse_timestamp(std::string_view text);

inline constexpr int kSnapshotFormatVersion = 1;

// One JSON object per line after a header line carrying the format version.
void save_snapshot(const std::vector<PageRecord>& records, const std::filesystem::path& path);
std::vector<PageRecord> load_snapshot(const std::filesystem::path& path);

std::string serialize_record(const PageRecord& record);
PageRecord parse_record(std::string_view line, std::size_t line_number);

}  // namespace mimir

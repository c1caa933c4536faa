#include "mimir/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mimir/codec.hpp"
#include "mimir/error.hpp"

namespace mimir {

using nlohmann::json;

std::string_view OnionAddress::label() const {
  std::string_view h = host;
  constexpr std::string_view suffix = ".onion";
  if (h.size() >= suffix.size() && h.substr(h.size() - suffix.size()) == suffix) {
    h.remove_suffix(suffix.size());
  }
  return h;
}

std::string_view to_string(OnionVersion v) {
  switch (v) {
    case OnionVersion::V2: return "V2";
    case OnionVersion::V3: return "V3";
    case OnionVersion::Malformed: return "Malformed";
  }
  return "Malformed";
}

std::string_view to_string(LinkClass k) {
  switch (k) {
    case LinkClass::Own: return "Own";
    case LinkClass::ExternalOnion: return "ExternalOnion";
    case LinkClass::Surface: return "Surface";
  }
  return "Own";
}

std::string_view to_string(CrawlState s) {
  switch (s) {
    case CrawlState::Pending: return "Pending";
    case CrawlState::Fetched: return "Fetched";
    case CrawlState::Unreachable: return "Unreachable";
  }
  return "Pending";
}

OnionVersion parse_onion_version(std::string_view s) {
  if (s == "V2") return OnionVersion::V2;
  if (s == "V3") return OnionVersion::V3;
  if (s == "Malformed") return OnionVersion::Malformed;
  throw Error(ErrorCode::SchemaError, "unknown onion version '" + std::string(s) + "'");
}

LinkClass parse_link_class(std::string_view s) {
  if (s == "Own") return LinkClass::Own;
  if (s == "ExternalOnion") return LinkClass::ExternalOnion;
  if (s == "Surface") return LinkClass::Surface;
  throw Error(ErrorCode::SchemaError, "unknown link class '" + std::string(s) + "'");
}

CrawlState parse_crawl_state(std::string_view s) {
  if (s == "Pending") return CrawlState::Pending;
  if (s == "Fetched") return CrawlState::Fetched;
  if (s == "Unreachable") return CrawlState::Unreachable;
  throw Error(ErrorCode::SchemaError, "unknown crawl status '" + std::string(s) + "'");
}

OnionVersion classify_onion_label(std::string_view label) {
  if (label.size() == 16) return OnionVersion::V2;
  if (label.size() == 56) return OnionVersion::V3;
  return OnionVersion::Malformed;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

NormalizedUrl normalize_url(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) throw Error(ErrorCode::EmptyInput, "empty URL");

  if (auto scheme = s.find("://"); scheme != std::string_view::npos) s.remove_prefix(scheme + 3);
  if (auto end = s.find_first_of("/?#\\ \t\r\n"); end != std::string_view::npos) s = s.substr(0, end);
  if (auto at = s.rfind('@'); at != std::string_view::npos) s.remove_prefix(at + 1);
  if (auto colon = s.find(':'); colon != std::string_view::npos) s = s.substr(0, colon);
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);

  std::string host(s);
  std::transform(host.begin(), host.end(), host.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  constexpr std::string_view suffix = ".onion";
  if (host.size() < suffix.size() || std::string_view(host).substr(host.size() - suffix.size()) != suffix) {
    return SurfaceHost{host};
  }
  std::string_view label = std::string_view(host).substr(0, host.size() - suffix.size());
  if (auto dot = label.rfind('.'); dot != std::string_view::npos) label.remove_prefix(dot + 1);
  OnionAddress addr;
  addr.host = std::string(label) + std::string(suffix);
  addr.version = classify_onion_label(label);
  return addr;
}

std::string onion_host_of(std::string_view raw) {
  if (trim(raw).empty()) return {};
  auto n = normalize_url(raw);
  if (auto* onion = std::get_if<OnionAddress>(&n)) return onion->host;
  return {};
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  sys_seconds tp{seconds{epoch_seconds}};
  auto day = floor<days>(tp);
  year_month_day ymd{day};
  hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02u-%02u-%02d %02d:%02d:%02d", static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()) % 100,
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  unsigned d = 0, mo = 0, y = 0, h = 0, mi = 0, s = 0;
  std::string buf(text);
  char tail = 0;
  if (std::sscanf(buf.c_str(), "%2u-%2u-%2u %2u:%2u:%2u%c", &d, &mo, &y, &h, &mi, &s, &tail) != 6 ||
      buf.size() != 17) {
    throw Error(ErrorCode::SchemaError, "bad timestamp '" + buf + "'");
  }
  year_month_day ymd{year{2000 + static_cast<int>(y)}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw Error(ErrorCode::SchemaError, "bad timestamp '" + buf + "'");
  auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return tp.time_since_epoch().count();
}

std::string serialize_record(const PageRecord& r) {
  json links = json::array();
  for (const auto& l : r.link_list) links.push_back(json::array({l.url, to_string(l.kind)}));
  json j = {
      {"url", r.url.host},
      {"version", to_string(r.url.version)},
      {"metadata", r.metadata},
      {"link_list", std::move(links)},
      {"referenced_by", r.referenced_by},
      {"html", base64_encode(r.html)},
      {"timestamps", r.timestamps},
      {"languages", r.languages},
      {"depth", r.depth},
      {"status", to_string(r.status.state)},
      {"attempts", r.status.attempts},
  };
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace {

template <class T>
T field(const json& j, const char* name, std::size_t line) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": missing field '" + name + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError,
                "line " + std::to_string(line) + ": field '" + name + "': " + e.what());
  }
}

}  // namespace

PageRecord parse_record(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_number) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_number) + ": not an object");

  PageRecord r;
  try {
    r.url.host = field<std::string>(j, "url", line_number);
    r.url.version = parse_onion_version(field<std::string>(j, "version", line_number));
    r.metadata = field<std::map<std::string, std::string>>(j, "metadata", line_number);
    for (const auto& pair : field<std::vector<std::vector<std::string>>>(j, "link_list", line_number)) {
      if (pair.size() != 2) throw Error(ErrorCode::SchemaError, "link entry must be [url, class]");
      r.link_list.push_back({pair[0], parse_link_class(pair[1])});
    }
    r.referenced_by = field<std::set<std::string>>(j, "referenced_by", line_number);
    r.html = base64_decode(field<std::string>(j, "html", line_number));
    r.timestamps = field<std::vector<std::string>>(j, "timestamps", line_number);
    for (const auto& ts : r.timestamps) parse_timestamp(ts);
    r.languages = field<std::vector<std::string>>(j, "languages", line_number);
    r.depth = field<int>(j, "depth", line_number);
    r.status.state = parse_crawl_state(field<std::string>(j, "status", line_number));
    r.status.attempts = field<int>(j, "attempts", line_number);
  } catch (const Error& e) {
    if (std::string_view(e.what()).find("line ") != std::string_view::npos) throw;
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_number) + ": " + e.what());
  }
  if (r.depth < 0 || r.status.attempts < 0) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_number) + ": negative depth or attempts");
  }
  return r;
}

void save_snapshot(const std::vector<PageRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << json{{"format", "mimir-snapshot"}, {"format_version", kSnapshotFormatVersion}}.dump() << '\n';
  for (const auto& r : records) out << serialize_record(r) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<PageRecord> load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<PageRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1) {
      json header;
      try {
        header = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, "line 1: bad header: " + std::string(e.what()));
      }
      if (!header.is_object() || header.value("format_version", -1) != kSnapshotFormatVersion) {
        throw Error(ErrorCode::SchemaError, "line 1: unsupported snapshot format version");
      }
      continue;
    }
    records.push_back(parse_record(line, line_number));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return records;
}

}  // namespace mimir

#include "mimir/ctph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <vector>

#include "mimir/error.hpp"

namespace mimir {

namespace {

constexpr std::uint32_t kHashPrime = 0x01000193;
constexpr std::uint32_t kHashInit = 0x28021967;
constexpr std::size_t kRollingWindow = 7;
constexpr char kBase64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

class RollingHash {
 public:
  void update(unsigned char c) {
    h2_ -= h1_;
    h2_ += static_cast<std::uint32_t>(kRollingWindow) * c;
    h1_ += c;
    h1_ -= window_[n_ % kRollingWindow];
    window_[n_ % kRollingWindow] = c;
    ++n_;
    h3_ <<= 5;
    h3_ ^= c;
  }
  std::uint32_t sum() const { return h1_ + h2_ + h3_; }

 private:
  std::array<unsigned char, kRollingWindow> window_{};
  std::uint32_t h1_ = 0, h2_ = 0, h3_ = 0;
  std::uint32_t n_ = 0;
};

constexpr std::uint32_t piece_hash(std::uint32_t h, unsigned char c) { return (h * kHashPrime) ^ c; }

struct Signatures {
  std::string sig1, sig2;
  std::size_t pieces = 0;  // sig1 symbols produced by triggers, without the tail
};

// One pass at a fixed block size.
Signatures hash_at(std::string_view data, std::uint32_t block_size) {
  RollingHash roll;
  std::uint32_t h1 = kHashInit, h2 = kHashInit;
  std::string sig1, sig2;
  char tail1 = 0, tail2 = 0;
  for (unsigned char c : data) {
    h1 = piece_hash(h1, c);
    h2 = piece_hash(h2, c);
    roll.update(c);
    std::uint32_t r = roll.sum();
    if (r % block_size == block_size - 1) {
      tail1 = kBase64[h1 % 64];
      if (sig1.size() < FuzzyHash::kSignatureLength - 1) {
        sig1.push_back(tail1);
        h1 = kHashInit;
        tail1 = 0;
      }
      if (r % (2 * block_size) == 2 * block_size - 1) {
        tail2 = kBase64[h2 % 64];
        if (sig2.size() < FuzzyHash::kSignatureLength / 2 - 1) {
          sig2.push_back(tail2);
          h2 = kHashInit;
          tail2 = 0;
        }
      }
    }
  }
  const std::size_t pieces = sig1.size();
  if (roll.sum() != 0) {
    sig1.push_back(kBase64[h1 % 64]);
    sig2.push_back(kBase64[h2 % 64]);
  } else {
    if (tail1) sig1.push_back(tail1);
    if (tail2) sig2.push_back(tail2);
  }
  return {std::move(sig1), std::move(sig2), pieces};
}

}  // namespace

std::string FuzzyHash::to_string() const { return std::to_string(block_size) + ":" + sig1 + ":" + sig2; }

FuzzyHash FuzzyHash::parse(std::string_view text) {
  auto c1 = text.find(':');
  auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw Error(ErrorCode::SchemaError, "fuzzy hash needs block:sig1:sig2");
  FuzzyHash h;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + c1, h.block_size);
  if (ec != std::errc{} || ptr != text.data() + c1 || h.block_size < kMinBlockSize) {
    throw Error(ErrorCode::SchemaError, "bad fuzzy hash block size");
  }
  h.sig1 = std::string(text.substr(c1 + 1, c2 - c1 - 1));
  h.sig2 = std::string(text.substr(c2 + 1));
  if (h.sig1.size() > kSignatureLength || h.sig2.size() > kSignatureLength / 2) {
    throw Error(ErrorCode::SchemaError, "fuzzy hash signature too long");
  }
  return h;
}

FuzzyHash ctph_hash(std::string_view data) {
  // Smallest 3 * 2^k whose 64 pieces cover the input.
  std::uint32_t block_size = FuzzyHash::kMinBlockSize;
  while (static_cast<std::uint64_t>(block_size) * FuzzyHash::kSignatureLength < data.size()) block_size *= 2;

  for (;;) {
    auto [sig1, sig2, pieces] = hash_at(data, block_size);
    // Too few pieces: the trigger is too rare at this size, retry at half.
    if (block_size > FuzzyHash::kMinBlockSize && pieces < FuzzyHash::kSignatureLength / 2) {
      block_size /= 2;
      continue;
    }
    return FuzzyHash{block_size, std::move(sig1), std::move(sig2)};
  }
}

namespace detail {

std::string strip_sequences(std::string_view sig) {
  std::string out;
  out.reserve(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i >= 3 && sig[i] == sig[i - 1] && sig[i] == sig[i - 2] && sig[i] == sig[i - 3]) continue;
    out.push_back(sig[i]);
  }
  return out;
}

int weighted_edit_distance(std::string_view a, std::string_view b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool has_common_substring(std::string_view a, std::string_view b, std::size_t length) {
  if (a.size() < length || b.size() < length) return false;
  for (std::size_t i = 0; i + length <= a.size(); ++i) {
    if (b.find(a.substr(i, length)) != std::string_view::npos) return true;
  }
  return false;
}

}  // namespace detail

namespace {

int score_strings(const std::string& s1, const std::string& s2, std::uint32_t block_size) {
  if (!detail::has_common_substring(s1, s2, kRollingWindow)) return 0;
  const auto total = static_cast<int>(s1.size() + s2.size());
  int score = detail::weighted_edit_distance(s1, s2);
  score = score * static_cast<int>(FuzzyHash::kSignatureLength) / total;
  score = 100 * score / static_cast<int>(FuzzyHash::kSignatureLength);
  if (score >= 100) return 0;
  score = 100 - score;
  // Short signatures at small block sizes cannot support a high score.
  const auto cap = static_cast<int>(block_size / FuzzyHash::kMinBlockSize * std::min(s1.size(), s2.size()));
  return std::min(score, cap);
}

}  // namespace

int ctph_compare(const FuzzyHash& a, const FuzzyHash& b) {
  const auto bs_a = a.block_size, bs_b = b.block_size;
  if (bs_a != bs_b && bs_a != 2 * bs_b && bs_b != 2 * bs_a) return 0;

  const std::string a1 = detail::strip_sequences(a.sig1), a2 = detail::strip_sequences(a.sig2);
  const std::string b1 = detail::strip_sequences(b.sig1), b2 = detail::strip_sequences(b.sig2);

  if (bs_a == bs_b && a1 == b1) return 100;
  if (bs_a == bs_b) return std::max(score_strings(a1, b1, bs_a), score_strings(a2, b2, 2 * bs_a));
  if (bs_a == 2 * bs_b) return score_strings(a1, b2, bs_a);
  return score_strings(a2, b1, bs_b);
}

}  // namespace mimir

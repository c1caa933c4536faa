#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mimir {

// Context-triggered piecewise hash (spamsum/ssdeep layout).
struct FuzzyHash {
  static constexpr std::uint32_t kMinBlockSize = 3;
  static constexpr std::size_t kSignatureLength = 64;

  std::uint32_t block_size = kMinBlockSize;
  std::string sig1;  // pieces at block_size, at most 64 symbols
  std::string sig2;  // pieces at 2 * block_size, at most 32 symbols

  // "block_size:sig1:sig2"
  std::string to_string() const;
  // Throws Error(SchemaError) on malformed text.
  static FuzzyHash parse(std::string_view text);

  friend bool operator==(const FuzzyHash&, const FuzzyHash&) = default;
};

FuzzyHash ctph_hash(std::string_view data);

// Similarity 0..100. Zero unless the block sizes are equal or a factor of two
// apart; otherwise a weighted edit distance (insert/delete 1, substitute 2)
// between the comparable signatures, scaled to 0..100. Symmetric.
int ctph_compare(const FuzzyHash& a, const FuzzyHash& b);

namespace detail {
// Collapses runs of more than three identical symbols to three.
std::string strip_sequences(std::string_view sig);
// Weighted edit distance used by ctph_compare.
int weighted_edit_distance(std::string_view a, std::string_view b);
bool has_common_substring(std::string_view a, std::string_view b, std::size_t length);
}  // namespace detail

}  // namespace mimir

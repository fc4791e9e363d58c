#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace alphaembed {

using TokenId = std::int32_t;
using Sequence = std::vector<TokenId>;
// All randomness in the library flows through an explicitly passed engine.
using Rng = std::mt19937_64;

// Token table split into a non-interchangeable block [0, n) followed by an
// interchangeable block [n, n + m). Ids 0, 1, 2 are always pad, start, end.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kStart = 1;
  static constexpr TokenId kEnd = 2;
  static constexpr int kSpecialCount = 3;

  Vocabulary() : Vocabulary({}, 0) {}
  // `symbols` are the task's fixed tokens; the specials are prepended.
  Vocabulary(std::vector<std::string> symbols, int interchangeable_count);

  // a..z, then ap26, ap27, ...
  static std::string interchangeable_name(int index);

  int size() const { return static_cast<int>(tokens_.size()); }
  int non_interchangeable_count() const { return n_; }
  int interchangeable_count() const { return m_; }

  bool is_interchangeable(TokenId id) const { return id >= n_ && id < n_ + m_; }
  bool contains(TokenId id) const { return id >= 0 && id < size(); }
  TokenId interchangeable_id(int index) const;
  int interchangeable_index(TokenId id) const;

  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  // Throws ParseError for unknown tokens.
  TokenId id(std::string_view token) const;

  // Task symbols, i.e. the non-interchangeable block without the specials.
  std::vector<std::string> symbols() const;

  // Compact text form: single-character tokens are written as-is, longer
  // tokens in angle brackets (`<ap26>`). Whitespace is ignored on input.
  Sequence encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.n_ == b.n_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  int n_ = 0;
  int m_ = 0;
};

// Grows the interchangeable block; the non-interchangeable ids are unchanged.
Vocabulary extend_vocabulary(const Vocabulary& v, int new_m);

// Injective map from the interchangeable ids of a source vocabulary into the
// interchangeable ids of a target vocabulary sharing the same fixed block.
// Identity on ids below `first_interchangeable`.
class Renaming {
 public:
  static constexpr int kUnmapped = -1;

  Renaming() = default;
  // image[i] is the target interchangeable index of source index i, or
  // kUnmapped when i lies outside the domain.
  Renaming(int first_interchangeable, std::vector<int> image, int target_m);

  static Renaming identity(int first_interchangeable, int m);

  int first_interchangeable() const { return first_; }
  int source_m() const { return static_cast<int>(image_.size()); }
  int target_m() const { return target_m_; }
  const std::vector<int>& image() const { return image_; }

  bool in_domain(TokenId id) const;
  // Throws DomainError for interchangeable ids outside the domain.
  TokenId operator()(TokenId id) const;

  friend bool operator==(const Renaming&, const Renaming&) = default;

 private:
  int first_ = 0;
  std::vector<int> image_;
  int target_m_ = 0;
};

Sequence apply_renaming(std::span<const TokenId> seq, const Renaming& r);
Renaming invert_renaming(const Renaming& r);

// Uniformly random injection of [0, source_m) into [0, target_m).
Renaming sample_renaming(Rng& rng, int first_interchangeable, int source_m,
                         int target_m);

// n! / (n - k)!, throwing OverflowError when it does not fit 64 bits.
std::uint64_t permutation_count(int n, int k);

// All injections of [0, k) into [0, target_m), lexicographic in the image.
std::vector<Renaming> enumerate_renamings(int first_interchangeable, int k,
                                          int target_m);

// Distinct interchangeable ids of the given sequences in order of first
// appearance, scanning the sequences in the given order.
std::vector<TokenId> interchangeable_in_order(
    const Vocabulary& v, std::initializer_list<std::span<const TokenId>> seqs);

// Renaming with domain `domain_ids` whose i-th element maps to `image[i]`.
Renaming renaming_from_pairs(const Vocabulary& v, std::span<const TokenId> domain_ids,
                             std::span<const int> image, int target_m);

}  // namespace alphaembed

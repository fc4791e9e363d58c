#include "alphaembed/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "alphaembed/errors.hpp"

namespace alphaembed {

Vocabulary::Vocabulary(std::vector<std::string> symbols,
                       int interchangeable_count) {
  if (interchangeable_count < 0) {
    throw SizeError("negative interchangeable token count");
  }
  tokens_ = {"<pad>", "<s>", "</s>"};
  for (auto& s : symbols) {
    const bool lone_close = s == ">";
    if (s.empty() || (!lone_close && s.find_first_of("<> \t\n") != std::string::npos)) {
      throw ConfigError("invalid token symbol '" + s + "'");
    }
    tokens_.push_back(std::move(s));
  }
  n_ = static_cast<int>(tokens_.size());
  m_ = interchangeable_count;
  for (int i = 0; i < m_; ++i) tokens_.push_back(interchangeable_name(i));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw ConfigError("duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::string Vocabulary::interchangeable_name(int index) {
  if (index < 26) return std::string(1, static_cast<char>('a' + index));
  return "ap" + std::to_string(index);
}

TokenId Vocabulary::interchangeable_id(int index) const {
  if (index < 0 || index >= m_) {
    throw RangeError("interchangeable index " + std::to_string(index) +
                     " outside [0, " + std::to_string(m_) + ")");
  }
  return static_cast<TokenId>(n_ + index);
}

int Vocabulary::interchangeable_index(TokenId id) const {
  if (!is_interchangeable(id)) {
    throw DomainError("token id " + std::to_string(id) +
                      " is not interchangeable");
  }
  return id - n_;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!contains(id)) {
    throw RangeError("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw ParseError("unknown token '" + std::string(token) + "'");
}

std::vector<std::string> Vocabulary::symbols() const {
  return {tokens_.begin() + kSpecialCount, tokens_.begin() + n_};
}

Sequence Vocabulary::encode(std::string_view text) const {
  Sequence out;
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '<') {
      const auto close = text.find('>', i);
      if (close == std::string_view::npos) {
        throw ParseError("unterminated '<' in token string");
      }
      const auto group = text.substr(i, close - i + 1);
      if (auto whole = find(group)) {
        out.push_back(*whole);
      } else {
        out.push_back(id(group.substr(1, group.size() - 2)));
      }
      i = close + 1;
      continue;
    }
    out.push_back(id(text.substr(i, 1)));
    ++i;
  }
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId t : ids) {
    const auto& s = token(t);
    if (s.size() == 1 || s.front() == '<') {
      out += s;
    } else {
      out += '<' + s + '>';
    }
  }
  return out;
}

Vocabulary extend_vocabulary(const Vocabulary& v, int new_m) {
  if (new_m < v.interchangeable_count()) {
    throw SizeError("cannot shrink interchangeable block from " +
                    std::to_string(v.interchangeable_count()) + " to " +
                    std::to_string(new_m));
  }
  return Vocabulary(v.symbols(), new_m);
}

Renaming::Renaming(int first_interchangeable, std::vector<int> image,
                   int target_m)
    : first_(first_interchangeable), image_(std::move(image)),
      target_m_(target_m) {
  std::vector<bool> used(static_cast<std::size_t>(std::max(target_m, 0)));
  for (int v : image_) {
    if (v == kUnmapped) continue;
    if (v < 0 || v >= target_m) {
      throw RangeError("renaming image " + std::to_string(v) +
                       " outside target block of size " +
                       std::to_string(target_m));
    }
    if (used[static_cast<std::size_t>(v)]) {
      throw DomainError("renaming is not injective");
    }
    used[static_cast<std::size_t>(v)] = true;
  }
}

Renaming Renaming::identity(int first_interchangeable, int m) {
  std::vector<int> image(static_cast<std::size_t>(m));
  std::iota(image.begin(), image.end(), 0);
  return Renaming(first_interchangeable, std::move(image), m);
}

bool Renaming::in_domain(TokenId id) const {
  if (id < 0) return false;
  if (id < first_) return true;
  const int index = id - first_;
  return index < source_m() && image_[static_cast<std::size_t>(index)] != kUnmapped;
}

TokenId Renaming::operator()(TokenId id) const {
  if (id >= 0 && id < first_) return id;
  if (!in_domain(id)) {
    throw DomainError("token id " + std::to_string(id) +
                      " outside renaming domain");
  }
  return static_cast<TokenId>(first_ + image_[static_cast<std::size_t>(id - first_)]);
}

Sequence apply_renaming(std::span<const TokenId> seq, const Renaming& r) {
  Sequence out;
  out.reserve(seq.size());
  for (TokenId t : seq) out.push_back(r(t));
  return out;
}

Renaming invert_renaming(const Renaming& r) {
  std::vector<int> inverse(static_cast<std::size_t>(r.target_m()),
                           Renaming::kUnmapped);
  for (int i = 0; i < r.source_m(); ++i) {
    const int v = r.image()[static_cast<std::size_t>(i)];
    if (v != Renaming::kUnmapped) inverse[static_cast<std::size_t>(v)] = i;
  }
  return Renaming(r.first_interchangeable(), std::move(inverse), r.source_m());
}

Renaming sample_renaming(Rng& rng, int first_interchangeable, int source_m,
                         int target_m) {
  if (source_m < 0 || target_m < source_m) {
    throw SizeError("cannot inject " + std::to_string(source_m) +
                    " interchangeable tokens into " + std::to_string(target_m));
  }
  // Partial Fisher-Yates: the first source_m slots form a uniform injection.
  std::vector<int> pool(static_cast<std::size_t>(target_m));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < source_m; ++i) {
    std::uniform_int_distribution<int> pick(i, target_m - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(source_m));
  return Renaming(first_interchangeable, std::move(pool), target_m);
}

std::uint64_t permutation_count(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) {
    const auto factor = static_cast<std::uint64_t>(n - i);
    if (total > UINT64_MAX / factor) {
      throw OverflowError("P(" + std::to_string(n) + ", " + std::to_string(k) +
                          ") exceeds 64 bits");
    }
    total *= factor;
  }
  return total;
}

std::vector<Renaming> enumerate_renamings(int first_interchangeable, int k,
                                          int target_m) {
  if (k < 0 || k > target_m) {
    throw SizeError("cannot enumerate injections of " + std::to_string(k) +
                    " into " + std::to_string(target_m));
  }
  std::vector<Renaming> out;
  out.reserve(permutation_count(target_m, k));
  std::vector<int> image(static_cast<std::size_t>(k));
  std::vector<bool> used(static_cast<std::size_t>(target_m));

  // Depth-first over positions, trying images in increasing order.
  auto recurse = [&](auto&& self, int pos) -> void {
    if (pos == k) {
      out.emplace_back(first_interchangeable, image, target_m);
      return;
    }
    for (int v = 0; v < target_m; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      image[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1);
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  recurse(recurse, 0);
  return out;
}

std::vector<TokenId> interchangeable_in_order(
    const Vocabulary& v, std::initializer_list<std::span<const TokenId>> seqs) {
  std::vector<TokenId> order;
  std::set<TokenId> seen;
  for (auto seq : seqs) {
    for (TokenId t : seq) {
      if (v.is_interchangeable(t) && seen.insert(t).second) order.push_back(t);
    }
  }
  return order;
}

Renaming renaming_from_pairs(const Vocabulary& v,
                             std::span<const TokenId> domain_ids,
                             std::span<const int> image, int target_m) {
  if (domain_ids.size() != image.size()) {
    throw SizeError("renaming domain and image differ in size");
  }
  std::vector<int> full(static_cast<std::size_t>(v.interchangeable_count()),
                        Renaming::kUnmapped);
  for (std::size_t i = 0; i < domain_ids.size(); ++i) {
    full[static_cast<std::size_t>(v.interchangeable_index(domain_ids[i]))] = image[i];
  }
  return Renaming(v.non_interchangeable_count(), std::move(full), target_m);
}

}  // namespace alphaembed

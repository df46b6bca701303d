#ifndef DKPC_VOCAB_HPP
#define DKPC_VOCAB_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dkpc/error.hpp"
#include "dkpc/text.hpp"

namespace dkpc {

// Token <-> id lookup. Ids 0..3 are the structural specials; the rest are
// corpus tokens ranked by frequency (descending, ties lexicographic) and
// capped. The <digit> pseudo-token counts inside the ranked region but is
// never evicted by the cap when it occurs in the corpus.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr std::size_t kDefaultCap = 50000;

  Vocabulary() = default;

  static Vocabulary build(const std::map<std::string, std::int64_t>& freq,
                          std::size_t cap = kDefaultCap);

  int id(const std::string& tok) const {
    auto it = lookup_.find(tok);
    return it == lookup_.end() ? kUnk : it->second;
  }
  bool contains(const std::string& tok) const { return lookup_.count(tok) != 0; }

  const std::string& token(int id) const {
    if (id < 0 || id >= static_cast<int>(items_.size()))
      throw VocabError("token id " + std::to_string(id) + " out of range");
    return items_[static_cast<std::size_t>(id)].token;
  }

  std::int64_t frequency(int id) const { return items_[static_cast<std::size_t>(id)].freq; }

  std::size_t size() const { return items_.size(); }

  std::vector<int> ids(const std::vector<std::string>& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id(t));
    return out;
  }

  struct Item {
    std::string token;
    std::int64_t freq = 0;
  };
  const std::vector<Item>& items() const { return items_; }

  // Rebuild from a serialized (token, freq) list in id order; used by the
  // cache loader. Validates the specials.
  static Vocabulary from_items(std::vector<Item> items);

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, int> lookup_;

  void index();
};

}  // namespace dkpc

#endif  // DKPC_VOCAB_HPP

#include "dkpc/vocab.hpp"

#include <algorithm>

namespace dkpc {

Vocabulary Vocabulary::build(const std::map<std::string, std::int64_t>& freq, std::size_t cap) {
  std::vector<Item> ranked;
  ranked.reserve(freq.size());
  for (const auto& [tok, count] : freq) ranked.push_back({tok, count});
  std::sort(ranked.begin(), ranked.end(), [](const Item& a, const Item& b) {
    if (a.freq != b.freq) return a.freq > b.freq;
    return a.token < b.token;
  });

  Vocabulary v;
  v.items_.push_back({tokens::kPad, 0});
  v.items_.push_back({tokens::kUnk, 0});
  v.items_.push_back({tokens::kBos, 0});
  v.items_.push_back({tokens::kEos, 0});

  bool digit_seen = freq.count(tokens::kDigit) != 0;
  bool digit_kept = false;
  std::size_t budget = cap;
  if (digit_seen) --budget;  // reserve a slot so <digit> can never be evicted
  std::size_t taken = 0;
  for (const Item& it : ranked) {
    if (it.token == tokens::kDigit) continue;
    if (taken >= budget) break;
    v.items_.push_back(it);
    ++taken;
  }
  if (digit_seen) {
    v.items_.push_back({tokens::kDigit, freq.at(tokens::kDigit)});
    digit_kept = true;
  }
  (void)digit_kept;

  // re-sort the ranked region so ids follow frequency order
  std::sort(v.items_.begin() + 4, v.items_.end(), [](const Item& a, const Item& b) {
    if (a.freq != b.freq) return a.freq > b.freq;
    return a.token < b.token;
  });
  v.index();
  return v;
}

Vocabulary Vocabulary::from_items(std::vector<Item> items) {
  if (items.size() < 4 || items[0].token != tokens::kPad || items[1].token != tokens::kUnk ||
      items[2].token != tokens::kBos || items[3].token != tokens::kEos)
    throw DataError("vocabulary table does not start with the special tokens");
  Vocabulary v;
  v.items_ = std::move(items);
  v.index();
  return v;
}

void Vocabulary::index() {
  lookup_.clear();
  lookup_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    auto [it, inserted] = lookup_.emplace(items_[i].token, static_cast<int>(i));
    if (!inserted) throw DataError("duplicate token in vocabulary: " + items_[i].token);
  }
}

}  // namespace dkpc

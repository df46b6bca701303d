#include "dkpc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dkpc {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp);
    out << contents;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot move " + tmp + " into place");
}

}  // namespace

Phrase make_phrase(const std::string& surface) {
  Phrase p;
  p.surface = trim(surface);
  p.tokens = preprocess(p.surface);
  return p;
}

std::vector<Document> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path);
  std::vector<Document> docs;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object())
      throw DataError("line " + std::to_string(lineno) + ": expected a JSON object");
    for (const char* field : {"title", "abstract", "keywords"})
      if (!obj.contains(field) || !obj[field].is_string())
        throw DataError("line " + std::to_string(lineno) + ": missing string field '" +
                        field + "'");
    Document d;
    d.id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>()
                                                       : "d" + std::to_string(lineno);
    d.title = obj["title"].get<std::string>();
    d.abstract_text = obj["abstract"].get<std::string>();
    std::stringstream kw(obj["keywords"].get<std::string>());
    std::string part;
    while (std::getline(kw, part, ';')) {
      std::string t = trim(part);
      if (!t.empty()) d.keyphrases.push_back(t);
    }
    if (!seen_ids.insert(d.id).second)
      throw DataError("line " + std::to_string(lineno) + ": duplicate document id '" + d.id +
                      "'");
    docs.push_back(std::move(d));
  }
  return docs;
}

std::optional<int> known_count_rule(int m) {
  // m = 0 is deleted per the rule; m = 1 is deleted too since completion
  // needs at least one known and one remaining target.
  if (m <= 1) return std::nullopt;
  if (m <= 3) return 1;
  if (m <= 5) return 2;
  if (m <= 20) return 3;
  return 5;
}

namespace {

SplitResult take_known(const std::vector<Phrase>& targets, int n, Rng& rng) {
  SplitResult res;
  auto picked = rng.sample_without_replacement(targets.size(), static_cast<std::size_t>(n));
  std::vector<bool> is_known(targets.size(), false);
  for (auto ix : picked) is_known[ix] = true;
  for (std::size_t i = 0; i < targets.size(); ++i)
    (is_known[i] ? res.known : res.remaining).push_back(targets[i]);
  return res;
}

}  // namespace

SplitResult split_known(const std::vector<Phrase>& targets, Rng& rng) {
  auto n = known_count_rule(static_cast<int>(targets.size()));
  if (!n) {
    SplitResult res;
    res.skipped = true;
    return res;
  }
  return take_known(targets, *n, rng);
}

SplitResult split_known_fraction(const std::vector<Phrase>& targets, double fraction, Rng& rng) {
  bool supported = false;
  for (double f : {0.1, 0.2, 0.3, 0.4, 0.5})
    if (std::fabs(fraction - f) < 1e-9) supported = true;
  if (!supported)
    throw UsageError("unsupported known fraction " + std::to_string(fraction));
  const int m = static_cast<int>(targets.size());
  const int n = static_cast<int>(std::floor(fraction * m + 1e-9));
  if (n == 0) {
    SplitResult res;
    res.skipped = true;
    return res;
  }
  return take_known(targets, n, rng);
}

CorpusCache build_corpus(const std::vector<Document>& docs, std::uint64_t seed,
                         std::size_t vocab_cap, std::map<std::string, std::string> config_echo) {
  struct PreDoc {
    const Document* doc;
    std::vector<std::string> x_tokens;
    std::vector<Phrase> phrases;
  };
  std::vector<PreDoc> pre;
  pre.reserve(docs.size());
  std::map<std::string, std::int64_t> freq;

  for (const Document& d : docs) {
    PreDoc pd;
    pd.doc = &d;
    pd.x_tokens = preprocess(d.title);
    pd.x_tokens.push_back(tokens::kSep);
    for (auto& t : preprocess(d.abstract_text)) pd.x_tokens.push_back(std::move(t));
    if (pd.x_tokens.size() > kMaxSourceLen) pd.x_tokens.resize(kMaxSourceLen);

    std::set<std::string> seen;
    for (const std::string& raw : d.keyphrases) {
      Phrase p = make_phrase(raw);
      if (p.empty()) continue;
      if (!seen.insert(p.stem_key()).second) continue;  // dedup by stemmed form
      pd.phrases.push_back(std::move(p));
    }
    for (const auto& t : pd.x_tokens) ++freq[t];
    for (const auto& p : pd.phrases)
      for (const auto& t : p.tokens) ++freq[t];
    pre.push_back(std::move(pd));
  }

  CorpusCache cache;
  cache.seed = seed;
  cache.config = std::move(config_echo);
  cache.vocab = Vocabulary::build(freq, vocab_cap);
  cache.stats.documents = docs.size();

  Rng master(seed);
  for (PreDoc& pd : pre) {
    Rng doc_rng = master.fork("split:" + pd.doc->id);
    SplitResult split = split_known(pd.phrases, doc_rng);
    if (split.skipped) {
      ++cache.stats.deleted;
      continue;
    }
    KpcSample s;
    s.doc_id = pd.doc->id;
    s.x_tokens = std::move(pd.x_tokens);
    s.x_ids = cache.vocab.ids(s.x_tokens);
    s.phrases = std::move(pd.phrases);
    s.known = std::move(split.known);
    s.targets = std::move(split.remaining);
    cache.samples.push_back(std::move(s));
  }
  cache.stats.samples = cache.samples.size();
  return cache;
}

void CorpusCache::save(const std::string& path) const {
  json j;
  j["format"] = kFormat;
  j["seed"] = seed;
  j["config"] = config;
  j["stats"] = {{"documents", stats.documents},
                {"deleted", stats.deleted},
                {"samples", stats.samples}};
  json vocab_items = json::array();
  for (const auto& it : vocab.items()) vocab_items.push_back({it.token, it.freq});
  j["vocab"] = std::move(vocab_items);

  json samples_json = json::array();
  for (const KpcSample& s : samples) {
    json phrases = json::array();
    std::vector<int> known_idx;
    std::size_t ki = 0;
    for (std::size_t i = 0; i < s.phrases.size(); ++i) {
      phrases.push_back({{"surface", s.phrases[i].surface}, {"tokens", s.phrases[i].tokens}});
      if (ki < s.known.size() && s.phrases[i].stem_key() == s.known[ki].stem_key()) {
        known_idx.push_back(static_cast<int>(i));
        ++ki;
      }
    }
    samples_json.push_back({{"doc_id", s.doc_id},
                            {"x_tokens", s.x_tokens},
                            {"x_ids", s.x_ids},
                            {"phrases", std::move(phrases)},
                            {"known_idx", known_idx}});
  }
  j["samples"] = std::move(samples_json);
  atomic_write(path, j.dump());
}

CorpusCache CorpusCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open cache file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("cache file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("format") || j["format"] != kFormat)
    throw DataError("cache file " + path + " has unsupported format tag");

  CorpusCache cache;
  cache.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("config")) cache.config = j["config"].get<std::map<std::string, std::string>>();
  cache.stats.documents = j["stats"]["documents"].get<std::size_t>();
  cache.stats.deleted = j["stats"]["deleted"].get<std::size_t>();
  cache.stats.samples = j["stats"]["samples"].get<std::size_t>();

  std::vector<Vocabulary::Item> items;
  for (const auto& it : j["vocab"])
    items.push_back({it[0].get<std::string>(), it[1].get<std::int64_t>()});
  cache.vocab = Vocabulary::from_items(std::move(items));

  for (const auto& sj : j["samples"]) {
    KpcSample s;
    s.doc_id = sj["doc_id"].get<std::string>();
    s.x_tokens = sj["x_tokens"].get<std::vector<std::string>>();
    s.x_ids = sj["x_ids"].get<std::vector<int>>();
    std::vector<int> known_idx = sj["known_idx"].get<std::vector<int>>();
    std::set<int> known_set(known_idx.begin(), known_idx.end());
    int i = 0;
    for (const auto& pj : sj["phrases"]) {
      Phrase p;
      p.surface = pj["surface"].get<std::string>();
      p.tokens = pj["tokens"].get<std::vector<std::string>>();
      s.phrases.push_back(p);
      (known_set.count(i) ? s.known : s.targets).push_back(std::move(p));
      ++i;
    }
    cache.samples.push_back(std::move(s));
  }
  if (cache.samples.size() != cache.stats.samples)
    throw DataError("cache file " + path + " sample count does not match its stats header");
  return cache;
}

}  // namespace dkpc

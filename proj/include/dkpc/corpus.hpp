#ifndef DKPC_CORPUS_HPP
#define DKPC_CORPUS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dkpc/rng.hpp"
#include "dkpc/vocab.hpp"

namespace dkpc {

struct Document {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> keyphrases;  // raw surface forms
};

// A keyphrase after preprocessing. stem_key() is the canonical form used for
// disjointness, dedup, inhibition and scoring.
struct Phrase {
  std::string surface;
  std::vector<std::string> tokens;  // preprocessed (lowercased, stemmed)

  std::string stem_key() const { return join_tokens(tokens); }
  bool empty() const { return tokens.empty(); }
};

struct KpcSample {
  std::string doc_id;
  std::vector<std::string> x_tokens;  // preprocessed source (title <sep> abstract)
  std::vector<int> x_ids;             // vocabulary ids of x_tokens (UNK-mapped)
  std::vector<Phrase> known;          // pre-designated keyphrases
  std::vector<Phrase> targets;        // remaining gold keyphrases
  std::vector<Phrase> phrases;        // full deduplicated keyphrase list, corpus order

  std::vector<std::vector<int>> known_ids(const Vocabulary& v) const {
    std::vector<std::vector<int>> out;
    for (const auto& p : known) out.push_back(v.ids(p.tokens));
    return out;
  }
};

// JSONL corpus: one object per line with "title", "abstract" and "keywords"
// (";"-separated). Parse failures report the 1-based line number.
std::vector<Document> load_jsonl(const std::string& path);

// How many known keyphrases to set aside for a document with m targets;
// nullopt means the sample is deleted.
std::optional<int> known_count_rule(int m);

struct SplitResult {
  bool skipped = false;
  std::vector<Phrase> known;
  std::vector<Phrase> remaining;
};

// Uniform sample of N known phrases per the fixed-count rule. Order of the
// remaining targets is preserved.
SplitResult split_known(const std::vector<Phrase>& targets, Rng& rng);

// N = floor(fraction * M); skipped when that is zero. Supported fractions
// are 0.1 .. 0.5 in steps of 0.1.
SplitResult split_known_fraction(const std::vector<Phrase>& targets, double fraction, Rng& rng);

// -- corpus construction ------------------------------------------------

struct CorpusStatsCounters {
  std::size_t documents = 0;
  std::size_t deleted = 0;    // M in {0, 1} after dedup
  std::size_t samples = 0;
};

struct CorpusCache {
  static constexpr const char* kFormat = "dkpc-cache-v1";

  std::map<std::string, std::string> config;  // resolved config echo
  std::uint64_t seed = 0;
  Vocabulary vocab;
  std::vector<KpcSample> samples;
  CorpusStatsCounters stats;

  void save(const std::string& path) const;
  static CorpusCache load(const std::string& path);
};

inline constexpr int kMaxSourceLen = 400;  // source truncation bound

// Preprocess documents, build the vocabulary, and apply the known-keyphrase
// split. Deterministic given the seed regardless of document order.
CorpusCache build_corpus(const std::vector<Document>& docs, std::uint64_t seed,
                         std::size_t vocab_cap = Vocabulary::kDefaultCap,
                         std::map<std::string, std::string> config_echo = {});

Phrase make_phrase(const std::string& surface);

}  // namespace dkpc

#endif  // DKPC_CORPUS_HPP

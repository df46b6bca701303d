#include "dkpc/text.hpp"

#include <cctype>

#include "dkpc/porter.hpp"

namespace dkpc {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool is_sentinel(const std::string& tok) {
  return tok == tokens::kDigit || tok == tokens::kSep || tok == tokens::kPad ||
         tok == tokens::kUnk || tok == tokens::kBos || tok == tokens::kEos;
}

}  // namespace

bool is_punct_token(const std::string& tok) {
  if (tok.empty()) return false;
  for (char c : tok)
    if (!is_punct(c)) return false;
  return true;
}

bool is_all_digits(const std::string& tok) {
  if (tok.empty()) return false;
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    std::string chunk = text.substr(start, i - start);
    for (char& c : chunk)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');

    if (is_sentinel(chunk)) {
      out.push_back(chunk);
      continue;
    }

    // peel leading punctuation
    std::size_t lo = 0, hi = chunk.size();
    std::vector<std::string> trailing;
    while (lo < hi && is_punct(chunk[lo])) {
      out.push_back(std::string(1, chunk[lo]));
      ++lo;
    }
    while (hi > lo && is_punct(chunk[hi - 1])) {
      trailing.push_back(std::string(1, chunk[hi - 1]));
      --hi;
    }
    if (hi > lo) out.push_back(chunk.substr(lo, hi - lo));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.push_back(*it);
  }
  return out;
}

std::vector<std::string> preprocess(const std::string& text) {
  std::vector<std::string> toks = tokenize(text);
  for (std::string& t : toks) {
    if (is_all_digits(t))
      t = tokens::kDigit;
    else
      t = porter_stem(t);
  }
  return toks;
}

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += ' ';
    s += toks[i];
  }
  return s;
}

}  // namespace dkpc

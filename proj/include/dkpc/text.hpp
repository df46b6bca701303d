#ifndef DKPC_TEXT_HPP
#define DKPC_TEXT_HPP

#include <string>
#include <vector>

namespace dkpc {

namespace tokens {
inline constexpr const char* kPad = "<pad>";
inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kBos = "<bos>";
inline constexpr const char* kEos = "<eos>";
inline constexpr const char* kDigit = "<digit>";
inline constexpr const char* kSep = "<sep>";  // joins title and abstract
}  // namespace tokens

// Lowercase, split on whitespace, peel leading/trailing punctuation into
// their own tokens. Interior punctuation ("state-of-the-art", "3.5") stays.
// Sentinel tokens like <digit> pass through whole so the pipeline is
// idempotent on its own output.
std::vector<std::string> tokenize(const std::string& text);

// tokenize + all-digit tokens -> <digit> + Porter stem per token.
std::vector<std::string> preprocess(const std::string& text);

bool is_punct_token(const std::string& tok);
bool is_all_digits(const std::string& tok);

std::string join_tokens(const std::vector<std::string>& toks);

}  // namespace dkpc

#endif  // DKPC_TEXT_HPP

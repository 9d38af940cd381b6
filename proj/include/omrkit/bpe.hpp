#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace omrkit::bpe {

// Special tokens, in reserved-id order. They sit at the top of the id space
// (after the 256 byte tokens and all merge tokens), are atomic in encode,
// and never appear inside merges.
inline constexpr std::array<const char*, 4> kSpecialTokens = {
    "<|begin_of_abc|>",
    "<|image|>",
    "<|end_of_abc|>",
    "<|text|>",
};

inline constexpr std::size_t kByteAlphabet = 256;

struct TokenVocab {
    // Ordered merge list; replaying it deterministically rebuilds the table.
    std::vector<std::pair<std::string, std::string>> merges;
    // id -> byte string: [0,256) bytes, then one entry per merge, then the
    // specials.
    std::vector<std::string> tokens;
    std::map<std::string, int> special_ids;
    std::string version = "omrkit-bpe-v1";

    std::size_t size() const { return tokens.size(); }
};

// Trains byte-level BPE: repeatedly merges the most frequent adjacent token
// pair (ties broken lexicographically on the (left, right) token strings)
// until the vocabulary reaches vocab_size. Text is split on special-token
// literals first, so merges never cross or contain them. Throws
// CorpusTooSmall when the merge budget cannot be met (no remaining pair
// occurs at least twice), std::invalid_argument when vocab_size is below
// bytes + specials.
TokenVocab train(const std::vector<std::string>& corpus, std::size_t vocab_size);

// Greedy application of merges in training order; any byte sequence is
// representable. Special-token literals map to their single reserved id.
std::vector<int> encode(const std::string& text, const TokenVocab& vocab);

// Concatenates token strings; inverse of encode. Throws UnknownTokenId.
std::string decode(const std::vector<int>& ids, const TokenVocab& vocab);

// JSON serialization; merge bytes are stored via the latin-1 byte <->
// codepoint mapping so the file stays valid UTF-8.
std::string vocab_to_json(const TokenVocab& vocab);
TokenVocab vocab_from_json(const std::string& json_text);

} // namespace omrkit::bpe

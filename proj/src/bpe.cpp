#include "omrkit/bpe.hpp"

#include "omrkit/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace omrkit::bpe {

namespace {

std::uint64_t pair_key(int left, int right) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
           static_cast<std::uint32_t>(right);
}

// Splits text into byte segments separated by special-token literals;
// on_special receives the index into kSpecialTokens.
template <typename SegmentFn, typename SpecialFn>
void split_on_specials(const std::string& text, SegmentFn on_segment, SpecialFn on_special) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t best = std::string::npos;
        int which = -1;
        for (std::size_t s = 0; s < kSpecialTokens.size(); ++s) {
            std::size_t at = text.find(kSpecialTokens[s], pos);
            if (at != std::string::npos && (best == std::string::npos || at < best)) {
                best = at;
                which = static_cast<int>(s);
            }
        }
        if (best == std::string::npos) {
            on_segment(text.substr(pos));
            return;
        }
        if (best > pos)
            on_segment(text.substr(pos, best - pos));
        on_special(which);
        pos = best + std::string(kSpecialTokens[static_cast<std::size_t>(which)]).size();
    }
}

// Token stream for training: a doubly linked list over one arena so pair
// replacements are O(1) and pair counts can be maintained incrementally.
struct Arena {
    std::vector<int> token; // -1 marks a node consumed by a merge
    std::vector<int> prev;
    std::vector<int> next;

    int add(int tok, int prev_node) {
        int idx = static_cast<int>(token.size());
        token.push_back(tok);
        prev.push_back(prev_node);
        next.push_back(-1);
        if (prev_node >= 0)
            next[static_cast<std::size_t>(prev_node)] = idx;
        return idx;
    }
};

struct HeapEntry {
    std::int64_t count;
    int left;
    int right;
};

void finish_vocab(TokenVocab& vocab) {
    for (std::size_t s = 0; s < kSpecialTokens.size(); ++s) {
        vocab.special_ids[kSpecialTokens[s]] = static_cast<int>(vocab.tokens.size());
        vocab.tokens.push_back(kSpecialTokens[s]);
    }
}

std::string byte_token(unsigned byte) { return std::string(1, static_cast<char>(byte)); }

// Latin-1 view of a byte string: byte 0xNN becomes codepoint U+00NN, so any
// token serializes as valid UTF-8.
std::string bytes_to_latin1(const std::string& bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (unsigned char c : bytes) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::string latin1_to_bytes(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < text.size()) {
            unsigned char c2 = static_cast<unsigned char>(text[i + 1]);
            unsigned cp = (static_cast<unsigned>(c & 0x1F) << 6) | (c2 & 0x3F);
            if ((c2 & 0xC0) != 0x80 || cp > 0xFF)
                throw std::invalid_argument("vocab token is not a latin-1 byte string");
            out.push_back(static_cast<char>(cp));
            i += 2;
        } else {
            throw std::invalid_argument("vocab token is not a latin-1 byte string");
        }
    }
    return out;
}

// Rebuilds the token table from an ordered merge list. Merge operands are
// matched to the earliest token id carrying that byte string, which is how
// the ids were assigned during training.
std::vector<std::pair<int, int>> replay_merges(TokenVocab& vocab) {
    vocab.tokens.clear();
    vocab.tokens.reserve(kByteAlphabet + vocab.merges.size() + kSpecialTokens.size());
    for (unsigned b = 0; b < kByteAlphabet; ++b)
        vocab.tokens.push_back(byte_token(b));
    std::unordered_map<std::string, int> first_id;
    for (unsigned b = 0; b < kByteAlphabet; ++b)
        first_id.emplace(vocab.tokens[b], static_cast<int>(b));
    std::vector<std::pair<int, int>> id_merges;
    id_merges.reserve(vocab.merges.size());
    for (const auto& [left, right] : vocab.merges) {
        auto li = first_id.find(left);
        auto ri = first_id.find(right);
        if (li == first_id.end() || ri == first_id.end())
            throw std::invalid_argument("merge references a token that does not exist yet");
        id_merges.emplace_back(li->second, ri->second);
        int id = static_cast<int>(vocab.tokens.size());
        vocab.tokens.push_back(left + right);
        first_id.emplace(vocab.tokens.back(), id);
    }
    return id_merges;
}

} // namespace

TokenVocab train(const std::vector<std::string>& corpus, std::size_t vocab_size) {
    const std::size_t floor_size = kByteAlphabet + kSpecialTokens.size();
    if (vocab_size < floor_size)
        throw std::invalid_argument("vocab_size must be at least " + std::to_string(floor_size));
    const std::size_t budget = vocab_size - floor_size;

    TokenVocab vocab;
    vocab.tokens.reserve(vocab_size);
    for (unsigned b = 0; b < kByteAlphabet; ++b)
        vocab.tokens.push_back(byte_token(b));

    if (budget == 0) {
        finish_vocab(vocab);
        return vocab;
    }

    // Specials are stripped before counting so no merge can absorb one.
    Arena arena;
    for (const auto& doc : corpus) {
        split_on_specials(
            doc,
            [&](const std::string& segment) {
                int prev_node = -1;
                for (unsigned char c : segment)
                    prev_node = arena.add(static_cast<int>(c), prev_node);
            },
            [](int) {});
    }

    std::unordered_map<std::uint64_t, std::int64_t> counts;
    std::unordered_map<std::uint64_t, std::vector<int>> positions;
    for (std::size_t i = 0; i < arena.token.size(); ++i) {
        int nxt = arena.next[i];
        if (nxt < 0)
            continue;
        std::uint64_t key = pair_key(arena.token[i], arena.token[static_cast<std::size_t>(nxt)]);
        ++counts[key];
        positions[key].push_back(static_cast<int>(i));
    }

    // Max-heap with lazy invalidation: highest count first, then the
    // lexicographically smallest (left, right) token strings.
    auto worse = [&](const HeapEntry& a, const HeapEntry& b) {
        if (a.count != b.count)
            return a.count < b.count;
        const auto& al = vocab.tokens[static_cast<std::size_t>(a.left)];
        const auto& bl = vocab.tokens[static_cast<std::size_t>(b.left)];
        if (al != bl)
            return al > bl;
        return vocab.tokens[static_cast<std::size_t>(a.right)] >
               vocab.tokens[static_cast<std::size_t>(b.right)];
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(worse)> heap(worse);
    for (const auto& [key, count] : counts)
        if (count >= 2)
            heap.push({count, static_cast<int>(key >> 32), static_cast<int>(key & 0xFFFFFFFF)});

    auto bump = [&](int left, int right, int left_node) {
        std::uint64_t key = pair_key(left, right);
        std::int64_t c = ++counts[key];
        positions[key].push_back(left_node);
        if (c >= 2)
            heap.push({c, left, right});
    };
    auto drop = [&](int left, int right) { --counts[pair_key(left, right)]; };

    for (std::size_t step = 0; step < budget; ++step) {
        int left = -1;
        int right = -1;
        while (!heap.empty()) {
            HeapEntry top = heap.top();
            heap.pop();
            std::int64_t current = counts[pair_key(top.left, top.right)];
            if (current != top.count) {
                if (current >= 2)
                    heap.push({current, top.left, top.right});
                continue;
            }
            left = top.left;
            right = top.right;
            break;
        }
        if (left < 0)
            throw Error(ErrorCode::CorpusTooSmall,
                        "corpus supports only " + std::to_string(step) + " of " +
                            std::to_string(budget) + " merges (no pair occurs twice)");

        const int merged = static_cast<int>(vocab.tokens.size());
        vocab.merges.emplace_back(vocab.tokens[static_cast<std::size_t>(left)],
                                  vocab.tokens[static_cast<std::size_t>(right)]);
        vocab.tokens.push_back(vocab.tokens[static_cast<std::size_t>(left)] +
                               vocab.tokens[static_cast<std::size_t>(right)]);

        std::uint64_t key = pair_key(left, right);
        std::vector<int> occ = std::move(positions[key]);
        positions.erase(key);
        std::sort(occ.begin(), occ.end());
        for (int node : occ) {
            std::size_t i = static_cast<std::size_t>(node);
            // Stale entries: the node may have been consumed, or its tokens
            // rewritten by an earlier (possibly overlapping) occurrence.
            if (arena.token[i] != left)
                continue;
            int j = arena.next[i];
            if (j < 0 || arena.token[static_cast<std::size_t>(j)] != right)
                continue;
            int p = arena.prev[i];
            int q = arena.next[static_cast<std::size_t>(j)];
            drop(left, right);
            if (p >= 0)
                drop(arena.token[static_cast<std::size_t>(p)], left);
            if (q >= 0)
                drop(right, arena.token[static_cast<std::size_t>(q)]);
            arena.token[i] = merged;
            arena.token[static_cast<std::size_t>(j)] = -1;
            arena.next[i] = q;
            if (q >= 0)
                arena.prev[static_cast<std::size_t>(q)] = static_cast<int>(i);
            if (p >= 0)
                bump(arena.token[static_cast<std::size_t>(p)], merged, p);
            if (q >= 0)
                bump(merged, arena.token[static_cast<std::size_t>(q)], static_cast<int>(i));
        }
        counts.erase(key);
    }

    finish_vocab(vocab);
    return vocab;
}

std::vector<int> encode(const std::string& text, const TokenVocab& vocab) {
    // Ranks keyed on id pairs; rebuilt per call. Callers encoding large
    // corpora hold the vocab anyway, and rebuild cost is linear in merges.
    TokenVocab scratch;
    scratch.merges = vocab.merges;
    std::vector<std::pair<int, int>> id_merges = replay_merges(scratch);
    std::unordered_map<std::uint64_t, int> rank;
    rank.reserve(id_merges.size());
    for (std::size_t r = 0; r < id_merges.size(); ++r)
        rank.emplace(pair_key(id_merges[r].first, id_merges[r].second), static_cast<int>(r));

    std::vector<int> out;
    auto encode_segment = [&](const std::string& segment) {
        std::vector<int> seg;
        seg.reserve(segment.size());
        for (unsigned char c : segment)
            seg.push_back(static_cast<int>(c));
        while (seg.size() > 1) {
            int best_rank = std::numeric_limits<int>::max();
            for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
                auto it = rank.find(pair_key(seg[i], seg[i + 1]));
                if (it != rank.end() && it->second < best_rank)
                    best_rank = it->second;
            }
            if (best_rank == std::numeric_limits<int>::max())
                break;
            const auto [left, right] = id_merges[static_cast<std::size_t>(best_rank)];
            const int merged = static_cast<int>(kByteAlphabet) + best_rank;
            std::vector<int> next;
            next.reserve(seg.size());
            for (std::size_t i = 0; i < seg.size();) {
                if (i + 1 < seg.size() && seg[i] == left && seg[i + 1] == right) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(seg[i]);
                    ++i;
                }
            }
            seg = std::move(next);
        }
        out.insert(out.end(), seg.begin(), seg.end());
    };
    split_on_specials(text, encode_segment, [&](int which) {
        out.push_back(static_cast<int>(kByteAlphabet + vocab.merges.size()) + which);
    });
    return out;
}

std::string decode(const std::vector<int>& ids, const TokenVocab& vocab) {
    std::string out;
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab.tokens.size())
            throw Error(ErrorCode::UnknownTokenId,
                        "token id " + std::to_string(id) + " is outside the vocabulary of " +
                            std::to_string(vocab.tokens.size()));
        out += vocab.tokens[static_cast<std::size_t>(id)];
    }
    return out;
}

std::string vocab_to_json(const TokenVocab& vocab) {
    nlohmann::json doc;
    doc["version"] = vocab.version;
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [left, right] : vocab.merges)
        merges.push_back({bytes_to_latin1(left), bytes_to_latin1(right)});
    doc["merges"] = std::move(merges);
    nlohmann::json specials = nlohmann::json::object();
    for (const auto& [name, id] : vocab.special_ids)
        specials[name] = id;
    doc["specials"] = std::move(specials);
    return doc.dump(2) + "\n";
}

TokenVocab vocab_from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    if (!doc.is_object() || !doc.contains("merges") || !doc.contains("specials"))
        throw std::invalid_argument("vocab file must carry merges and specials");
    TokenVocab vocab;
    if (doc.contains("version"))
        vocab.version = doc["version"].get<std::string>();
    for (const auto& entry : doc["merges"]) {
        if (!entry.is_array() || entry.size() != 2)
            throw std::invalid_argument("each merge must be a [left, right] pair");
        vocab.merges.emplace_back(latin1_to_bytes(entry[0].get<std::string>()),
                                  latin1_to_bytes(entry[1].get<std::string>()));
    }
    replay_merges(vocab);
    finish_vocab(vocab);
    if (doc["specials"].size() != vocab.special_ids.size())
        throw std::invalid_argument("special token table does not match this vocabulary");
    for (const auto& [name, id] : doc["specials"].items()) {
        auto it = vocab.special_ids.find(name);
        if (it == vocab.special_ids.end() || it->second != id.get<int>())
            throw std::invalid_argument("special token table does not match this vocabulary");
    }
    return vocab;
}

} // namespace omrkit::bpe

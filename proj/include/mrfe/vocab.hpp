#pragma once

#include "mrfe/precision.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;
inline constexpr std::size_t kMaskId = 2;
inline constexpr std::size_t kClsId = 3;
inline constexpr std::size_t kSepId = 4;
inline constexpr std::size_t kNumSpecials = 5;

class Vocab {
public:
    // Specials only.
    Vocab();

    // Specials followed by `tokens` in order; duplicates and specials are rejected.
    static Vocab from_tokens(const std::vector<std::string>& tokens);

    std::size_t size() const noexcept { return tokens_.size(); }
    bool contains(std::string_view token) const;
    // Unknown tokens map to [UNK].
    std::size_t id_of(std::string_view token) const;
    const std::string& token_of(std::size_t id) const;
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> ids_;
};

/// Lowercases and splits on whitespace; every ASCII punctuation character is
/// its own token, except that a trailing "n't" is kept whole ("don't" → do, n't).
std::vector<std::string> split_words(std::string_view text);

struct TokenSequence {
    std::vector<std::size_t> ids;
    std::vector<std::string> tokens;   // surface form per id, specials as "[CLS]" etc.

    std::size_t size() const noexcept { return ids.size(); }
};

/// [CLS] words [SEP], truncated to max_len with [SEP] kept last.
/// Throws ConfigError when max_len < 3.
TokenSequence encode(std::string_view text, const Vocab& vocab, std::size_t max_len);
std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len);

// Space-joined surface tokens, specials omitted.
std::string detokenize(const std::vector<std::size_t>& ids, const Vocab& vocab);

/// Frequency-ranked vocabulary (ties broken lexicographically) capped at
/// max_size entries including the five specials. Throws InputError on an
/// empty corpus.
Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t max_size);

} // namespace mrfe

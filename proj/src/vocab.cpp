#include "mrfe/vocab.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

namespace mrfe::inline MRFE_PRECISION {

namespace {
const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[MASK]", "[CLS]", "[SEP]"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) != 0;
}
} // namespace

Vocab::Vocab() {
    for (const auto& s : kSpecials) {
        ids_.emplace(s, tokens_.size());
        tokens_.push_back(s);
    }
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
    Vocab v;
    for (const auto& t : tokens) {
        if (v.ids_.count(t)) throw InputError("vocab: duplicate or reserved token '" + t + "'");
        v.ids_.emplace(t, v.tokens_.size());
        v.tokens_.push_back(t);
    }
    return v;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

std::size_t Vocab::id_of(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(std::size_t id) const {
    if (id >= tokens_.size()) {
        throw VocabError("token id " + std::to_string(id) + " outside vocabulary of size " +
                         std::to_string(tokens_.size()));
    }
    return tokens_[id];
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write vocabulary to " + path.string());
    for (std::size_t i = kNumSpecials; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read vocabulary " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) tokens.push_back(line);
    }
    return from_tokens(tokens);
}

std::vector<std::string> split_words(std::string_view text) {
    const std::string lower = to_lower(text);
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const char c = lower[i];
        if (is_space(c)) {
            flush();
        } else if (c == '\'' && i + 1 < lower.size() && lower[i + 1] == 't' && !cur.empty() && cur.back() == 'n' &&
                   (i + 2 == lower.size() || !std::isalnum(static_cast<unsigned char>(lower[i + 2])))) {
            cur.pop_back();
            flush();
            out.emplace_back("n't");
            ++i;
        } else if (is_punct(c)) {
            flush();
            out.emplace_back(1, c);
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

TokenSequence encode(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 3) throw ConfigError("tokenize: max_len must be at least 3, got " + std::to_string(max_len));
    const auto words = split_words(text);
    const std::size_t body = std::min(words.size(), max_len - 2);
    TokenSequence seq;
    seq.ids.reserve(body + 2);
    seq.tokens.reserve(body + 2);
    seq.ids.push_back(kClsId);
    seq.tokens.push_back(kSpecials[kClsId]);
    for (std::size_t i = 0; i < body; ++i) {
        seq.ids.push_back(vocab.id_of(words[i]));
        seq.tokens.push_back(words[i]);
    }
    seq.ids.push_back(kSepId);
    seq.tokens.push_back(kSpecials[kSepId]);
    return seq;
}

std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    return encode(text, vocab, max_len).ids;
}

std::string detokenize(const std::vector<std::size_t>& ids, const Vocab& vocab) {
    std::vector<std::string> words;
    for (auto id : ids) {
        if (id < kNumSpecials && id != kUnkId) continue;
        words.push_back(vocab.token_of(id));
    }
    return join(words, " ");
}

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t max_size) {
    if (corpus.empty()) throw InputError("build_vocab: empty corpus");
    std::map<std::string, std::size_t> counts;
    for (const auto& text : corpus) {
        for (auto& w : split_words(text)) ++counts[w];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (auto& [w, c] : counts) {
        if (std::find(kSpecials.begin(), kSpecials.end(), w) == kSpecials.end()) ranked.emplace_back(w, c);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    const std::size_t keep = max_size > kNumSpecials ? std::min(ranked.size(), max_size - kNumSpecials) : 0;
    std::vector<std::string> tokens;
    tokens.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) tokens.push_back(ranked[i].first);
    return Vocab::from_tokens(tokens);
}

} // namespace mrfe

#include "mrfe/augmentation.hpp"

#include "mrfe/csv.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/lexicon.hpp"
#include "mrfe/random.hpp"
#include "mrfe/text_util.hpp"
#include "mrfe/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <unordered_set>

namespace mrfe::inline MRFE_PRECISION {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::mask_fill: return "mask-fill";
    case Provenance::style: return "style";
    case Provenance::rationale: return "rationale";
    }
    return "?";
}

namespace {

// Space-joined, with "n't" glued to the preceding word so split_words inverts it.
std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty() && w != "n't") out.push_back(' ');
        out += w;
    }
    return out;
}

std::string normalized(std::string_view text) { return join_words(split_words(text)); }

} // namespace

std::vector<std::string> SynonymProvider::propose(const MaskedText& masked, unsigned k) const {
    if (masked.position >= masked.tokens.size()) return {};
    const auto& syn = lexicon::synonyms_of(masked.tokens[masked.position]);
    const std::size_t n = std::min<std::size_t>(k, syn.size());
    return {syn.begin(), syn.begin() + static_cast<long>(n)};
}

OfflineParaphraseProvider OfflineParaphraseProvider::read(std::istream& in) {
    const auto records = csv::read(in);
    if (records.empty()) throw ParseError("paraphrase file: missing header row");
    const std::vector<std::string> expected = {"source_text", "augmented_text", "label", "provider"};
    if (records.front().fields != expected) {
        throw ParseError("paraphrase file line " + std::to_string(records.front().line) +
                         ": header must be source_text,augmented_text,label,provider");
    }
    OfflineParaphraseProvider p;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r].fields;
        if (f.size() != expected.size()) {
            throw ParseError("paraphrase file line " + std::to_string(records[r].line) + ": expected 4 fields, got " +
                             std::to_string(f.size()));
        }
        if (r == 1 && !f[3].empty()) p.name_ = f[3];
        auto& list = p.by_source_[f[0]];
        if (std::find(list.begin(), list.end(), f[1]) == list.end()) list.push_back(f[1]);
        ++p.rows_;
    }
    return p;
}

OfflineParaphraseProvider OfflineParaphraseProvider::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open paraphrase file " + path.string());
    return read(in);
}

std::vector<std::string> OfflineParaphraseProvider::propose(const MaskedText& masked, unsigned k) const {
    auto it = by_source_.find(masked.source);
    if (it == by_source_.end()) return {};
    const std::size_t n = std::min<std::size_t>(k, it->second.size());
    return {it->second.begin(), it->second.begin() + static_cast<long>(n)};
}

void write_exchange_csv(std::ostream& out, const std::vector<ExchangeRow>& rows) {
    csv::write_row(out, {"source_text", "augmented_text", "label", "provider"});
    for (const auto& r : rows) csv::write_row(out, {r.source_text, r.augmented_text, r.label, r.provider});
}

std::vector<std::size_t> select_mask_targets(std::string_view x) {
    const auto words = split_words(x);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (lexicon::is_maskable(words[i])) out.push_back(i);
    }
    if (!out.empty() || words.empty()) return out;

    auto longest = [&](bool skip_stopwords) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (skip_stopwords && lexicon::is_stopword(words[i])) continue;
            if (words[i].size() == 1 && !std::isalnum(static_cast<unsigned char>(words[i][0]))) continue;
            if (!best || words[i].size() > words[*best].size()) best = i;
        }
        return best;
    };
    auto pick = longest(true);
    if (!pick) pick = longest(false);
    if (!pick) pick = 0;
    out.push_back(*pick);
    return out;
}

std::vector<std::string> generate_candidates(std::string_view x, const std::vector<std::size_t>& positions,
                                             const ParaphraseProvider& provider, unsigned k) {
    if (k == 0 || positions.empty()) return {};
    const auto words = split_words(x);
    for (auto p : positions) {
        if (p >= words.size()) {
            throw InputError("mask position " + std::to_string(p) + " outside " + std::to_string(words.size()) +
                             " tokens");
        }
    }
    const std::string source = normalized(x);

    auto ask = [&](std::size_t position) {
        try {
            return provider.propose(MaskedText{std::string(x), words, position}, k);
        } catch (const ProviderError&) {
            throw;
        } catch (const std::exception& e) {
            throw ProviderError(provider.name(), e.what());
        }
    };

    std::vector<std::string> out;
    std::unordered_set<std::string> seen{source};
    auto keep = [&](std::string text) {
        if (seen.insert(text).second) out.push_back(std::move(text));
    };
    if (provider.kind() == ProviderKind::paraphrase) {
        auto proposals = ask(positions.front());
        if (proposals.size() > k) proposals.resize(k);
        for (auto& p : proposals) keep(normalized(p));
        return out;
    }
    for (auto p : positions) {
        auto proposals = ask(p);
        if (proposals.size() > k) proposals.resize(k);
        for (const auto& fill : proposals) {
            auto replaced = words;
            replaced[p] = to_lower(trim(fill));
            if (replaced[p].empty()) continue;
            keep(join_words(replaced));
        }
    }
    return out;
}

std::string add_rationale_variant(std::string_view x, std::size_t /*label*/, std::string_view identifier) {
    const auto id = to_lower(trim(identifier));
    const auto words = split_words(x);
    if (id.empty() || std::find(words.begin(), words.end(), id) == words.end()) {
        throw InputError("rationale identifier '" + std::string(identifier) + "' does not occur in the text");
    }
    std::string base = trim(x);
    while (!base.empty() && (base.back() == '.' || base.back() == '!' || base.back() == '?')) base.pop_back();
    return trim(base) + " because \"" + id + "\" expresses strong sentiment.";
}

namespace {

const std::vector<std::pair<std::string, std::string>>& negatable_verbs() {
    static const std::vector<std::pair<std::string, std::string>> verbs = {
        {"do", "do"},       {"does", "does"},   {"did", "did"},     {"is", "is"},       {"are", "are"},
        {"was", "was"},     {"were", "were"},   {"has", "has"},     {"have", "have"},   {"had", "had"},
        {"would", "would"}, {"could", "could"}, {"should", "should"}, {"can", "ca"},    {"will", "wo"},
    };
    return verbs;
}

} // namespace

std::string restyle(std::string_view x, Style style) {
    const auto words = split_words(x);
    std::vector<std::string> out;
    if (style == Style::formal) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (words[i] == "n't") {
                if (!out.empty() && out.back() == "ca") out.back() = "can";
                else if (!out.empty() && out.back() == "wo") out.back() = "will";
                out.emplace_back("not");
            } else if (words[i] == "'" && i + 1 < words.size() && !out.empty()) {
                static const std::vector<std::pair<std::string, std::string>> tails = {
                    {"re", "are"}, {"m", "am"}, {"ll", "will"}, {"ve", "have"}, {"d", "would"}};
                auto it = std::find_if(tails.begin(), tails.end(),
                                       [&](const auto& t) { return t.first == words[i + 1]; });
                if (it == tails.end()) {
                    out.push_back(words[i]);
                } else {
                    out.push_back(it->second);
                    ++i;
                }
            } else {
                out.push_back(words[i]);
            }
        }
        return join_words(out);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == "cannot") {
            out.emplace_back("ca");
            out.emplace_back("n't");
            continue;
        }
        if (i + 1 < words.size() && words[i + 1] == "not") {
            const auto& verbs = negatable_verbs();
            auto it = std::find_if(verbs.begin(), verbs.end(), [&](const auto& v) { return v.first == words[i]; });
            if (it != verbs.end()) {
                out.push_back(it->second);
                out.emplace_back("n't");
                ++i;
                continue;
            }
        }
        out.push_back(words[i]);
    }
    return join_words(out);
}

std::string style_variant(std::string_view x) {
    const auto words = split_words(x);
    bool contracted = false;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == "n't" || (words[i] == "'" && i + 1 < words.size() && words[i + 1] != "s")) contracted = true;
    }
    return restyle(x, contracted ? Style::formal : Style::informal);
}

FilterResult filter_consistent(const std::vector<AugmentedSample>& candidates, const Judge& judge) {
    FilterResult r;
    r.considered = candidates.size();
    for (const auto& c : candidates) {
        if (judge(c.text) == c.label) r.retained.push_back(c);
    }
    return r;
}

AugmentResult augment_corpus(const LabeledCorpus& corpus, const ParaphraseProvider& provider, unsigned k,
                             const Judge& judge, std::uint64_t seed) {
    AugmentResult result;
    result.corpus = corpus;
    result.report.proposed_per_class.assign(corpus.num_classes(), 0);
    result.report.retained_per_class.assign(corpus.num_classes(), 0);
    if (k == 0) return result;

    std::mt19937_64 rng(seed);
    for (const auto& sample : corpus.samples) {
        const auto positions = select_mask_targets(sample.text);
        std::vector<AugmentedSample> pool;
        std::unordered_set<std::string> seen{normalized(sample.text)};
        auto offer = [&](std::string text, Provenance prov, std::string provider_name) {
            if (!seen.insert(text).second) return;
            pool.push_back({sample.text, std::move(text), sample.label, prov, std::move(provider_name)});
        };
        for (auto& c : generate_candidates(sample.text, positions, provider, k)) {
            offer(std::move(c), Provenance::mask_fill, provider.name());
        }
        offer(style_variant(sample.text), Provenance::style, "style");
        if (!positions.empty()) {
            const auto words = split_words(sample.text);
            offer(add_rationale_variant(sample.text, sample.label, words[positions.front()]), Provenance::rationale,
                  "rationale");
        }

        seeded_shuffle(pool, rng);
        if (pool.size() > k) pool.resize(k);
        auto filtered = filter_consistent(pool, judge);
        if (sample.label < result.report.proposed_per_class.size()) {
            result.report.proposed_per_class[sample.label] += pool.size();
            result.report.retained_per_class[sample.label] += filtered.retained.size();
        }
        result.report.considered += filtered.considered;
        result.report.retained += filtered.retained.size();
        for (auto& a : filtered.retained) {
            result.corpus.samples.push_back({a.text, a.label});
            result.added.push_back(std::move(a));
        }
    }
    return result;
}

std::vector<std::string> judge_features(std::string_view text) {
    const auto words = split_words(text);
    const auto& cues = lexicon::negation_cues();
    std::vector<std::string> out;
    bool negate_next = false;
    for (const auto& w : words) {
        if (w.size() == 1 && !std::isalnum(static_cast<unsigned char>(w[0]))) {
            negate_next = false;
            continue;
        }
        if (std::find(cues.begin(), cues.end(), w) != cues.end()) {
            negate_next = true;
            continue;
        }
        if (lexicon::is_stopword(w)) continue;
        out.push_back(negate_next ? "not_" + w : w);
        negate_next = false;
    }
    return out;
}

KeywordPolarityJudge KeywordPolarityJudge::fit(const LabeledCorpus& corpus) {
    const std::size_t classes = corpus.num_classes();
    if (classes == 0) throw ConfigError("judge: corpus has no classes");
    KeywordPolarityJudge j;
    std::vector<double> docs(classes, 0.0);
    std::vector<double> totals(classes, 0.0);
    std::map<std::string, std::vector<double>> counts;
    for (const auto& s : corpus.samples) {
        if (s.label >= classes) throw LabelError("judge: label " + std::to_string(s.label) + " out of range");
        docs[s.label] += 1.0;
        for (const auto& f : judge_features(s.text)) {
            auto& c = counts[f];
            if (c.empty()) c.assign(classes, 0.0);
            c[s.label] += 1.0;
            totals[s.label] += 1.0;
        }
    }
    const double vocab = static_cast<double>(counts.size()) + 1.0;
    const double n = static_cast<double>(corpus.size());
    j.priors_.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        j.priors_[c] = std::log((docs[c] + 1.0) / (n + static_cast<double>(classes)));
    }
    for (auto& [word, c] : counts) {
        auto& lp = j.log_prob_[word];
        lp.resize(classes);
        for (std::size_t k = 0; k < classes; ++k) lp[k] = std::log((c[k] + 1.0) / (totals[k] + vocab));
    }
    return j;
}

std::size_t KeywordPolarityJudge::operator()(const std::string& text) const {
    std::vector<double> score = priors_;
    for (const auto& f : judge_features(text)) {
        auto it = log_prob_.find(f);
        if (it == log_prob_.end()) continue;
        for (std::size_t c = 0; c < score.size(); ++c) score[c] += it->second[c];
    }
    return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
}

} // namespace mrfe

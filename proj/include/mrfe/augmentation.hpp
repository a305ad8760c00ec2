#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

enum class Provenance { mask_fill, style, rationale };
std::string to_string(Provenance p);

struct AugmentedSample {
    std::string source;
    std::string text;
    std::size_t label = 0;
    Provenance provenance = Provenance::mask_fill;
    std::string provider;

    friend bool operator==(const AugmentedSample&, const AugmentedSample&) = default;
};

/// A tokenized sentence with one position to be replaced.
struct MaskedText {
    std::string source;
    std::vector<std::string> tokens;
    std::size_t position = 0;
};

enum class ProviderKind {
    fill_in,     // proposals are single-token replacements for the masked position
    paraphrase,  // proposals are whole sentences
};

class ParaphraseProvider {
public:
    virtual ~ParaphraseProvider() = default;
    virtual std::string name() const = 0;
    virtual ProviderKind kind() const = 0;
    // At most k proposals.
    virtual std::vector<std::string> propose(const MaskedText& masked, unsigned k) const = 0;
    // Whether propose() may be called concurrently.
    virtual bool thread_safe() const { return true; }
};

/// Fills the mask with the first k other members of the word's synonym group.
class SynonymProvider final : public ParaphraseProvider {
public:
    std::string name() const override { return "synonym"; }
    ProviderKind kind() const override { return ProviderKind::fill_in; }
    std::vector<std::string> propose(const MaskedText& masked, unsigned k) const override;
};

/// Paraphrases read from an exchange CSV with columns
/// source_text, augmented_text, label, provider. Looked up by source text.
class OfflineParaphraseProvider final : public ParaphraseProvider {
public:
    static OfflineParaphraseProvider load(const std::filesystem::path& path);
    static OfflineParaphraseProvider read(std::istream& in);

    std::string name() const override { return name_; }
    ProviderKind kind() const override { return ProviderKind::paraphrase; }
    std::vector<std::string> propose(const MaskedText& masked, unsigned k) const override;
    std::size_t size() const noexcept { return rows_; }

private:
    std::string name_ = "offline";
    std::map<std::string, std::vector<std::string>> by_source_;
    std::size_t rows_ = 0;
};

struct ExchangeRow {
    std::string source_text;
    std::string augmented_text;
    std::string label;
    std::string provider;
};
void write_exchange_csv(std::ostream& out, const std::vector<ExchangeRow>& rows);

/// Positions (into split_words(x)) of lexicon words. Without any, the longest
/// non-stopword; for all-stopword input, the longest token. Ties keep the first.
std::vector<std::size_t> select_mask_targets(std::string_view x);

/// Fill-in providers: one candidate per proposal and position, the token at that
/// position replaced. Paraphrase providers: their proposals as given.
/// Candidates are space-joined tokens, deduplicated, never equal to the source.
/// Provider exceptions are rethrown as ProviderError.
std::vector<std::string> generate_candidates(std::string_view x, const std::vector<std::size_t>& positions,
                                             const ParaphraseProvider& provider, unsigned k);

/// x followed by a "because" clause naming the identifier. Throws InputError
/// when the identifier is not a token of x.
std::string add_rationale_variant(std::string_view x, std::size_t label, std::string_view identifier);

enum class Style { formal, informal };
// formal expands contractions; informal lowercases and contracts.
std::string restyle(std::string_view x, Style style);
// formal when x holds a contraction, informal otherwise.
std::string style_variant(std::string_view x);

using Judge = std::function<std::size_t(const std::string&)>;

struct FilterResult {
    std::vector<AugmentedSample> retained;
    std::size_t considered = 0;
    double retention_rate() const {
        return considered == 0 ? 1.0 : static_cast<double>(retained.size()) / static_cast<double>(considered);
    }
};

// Keeps exactly the candidates with judge(text) == label, in order.
FilterResult filter_consistent(const std::vector<AugmentedSample>& candidates, const Judge& judge);

struct AugmentReport {
    std::vector<std::size_t> proposed_per_class;
    std::vector<std::size_t> retained_per_class;
    std::size_t considered = 0;
    std::size_t retained = 0;
    double retention_rate() const {
        return considered == 0 ? 1.0 : static_cast<double>(retained) / static_cast<double>(considered);
    }
};

struct AugmentResult {
    LabeledCorpus corpus;                 // originals followed by retained augmentations
    std::vector<AugmentedSample> added;
    AugmentReport report;
};

/// Per source: mask-fill candidates, one style variant and one rationale
/// variant form a pool; a seeded shuffle picks k of them and the judge filters.
/// k = 0 returns the corpus unchanged.
AugmentResult augment_corpus(const LabeledCorpus& corpus, const ParaphraseProvider& provider, unsigned k,
                             const Judge& judge, std::uint64_t seed);

/// Polarity scorer fitted on a labeled corpus: smoothed per-class log
/// frequencies of tokens, with the token after a negation cue counted as
/// "not_<token>".
class KeywordPolarityJudge {
public:
    static KeywordPolarityJudge fit(const LabeledCorpus& corpus);
    std::size_t operator()(const std::string& text) const;
    std::size_t num_classes() const noexcept { return priors_.size(); }

private:
    std::vector<double> priors_;
    std::map<std::string, std::vector<double>> log_prob_;
};

std::vector<std::string> judge_features(std::string_view text);

} // namespace mrfe

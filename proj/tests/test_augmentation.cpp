#include "mrfe/augmentation.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/lexicon.hpp"
#include "mrfe/vocab.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace mrfe;

namespace {

std::string space_join(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
    return s;
}

// Pool size per source from the pipeline definition: every lexicon position
// filled with each of its first k synonyms, one style variant, one rationale
// naming the first target, minus duplicates and the source itself.
std::size_t oracle_pool(const std::string& text, unsigned k) {
    const auto words = split_words(text);
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < words.size(); ++i)
        if (lexicon::is_maskable(words[i])) positions.push_back(i);
    std::set<std::string> pool;
    for (auto p : positions) {
        const auto& syn = lexicon::synonyms_of(words[p]);
        for (std::size_t s = 0; s < std::min<std::size_t>(k, syn.size()); ++s) {
            auto w = words;
            w[p] = syn[s];
            pool.insert(space_join(w));
        }
    }
    pool.insert(style_variant(text));
    EXPECT_FALSE(positions.empty()) << text;
    pool.insert(add_rationale_variant(text, 0, words[positions.front()]));
    pool.erase(space_join(words));
    return pool.size();
}

class ThrowingProvider final : public ParaphraseProvider {
public:
    std::string name() const override { return "broken"; }
    ProviderKind kind() const override { return ProviderKind::fill_in; }
    std::vector<std::string> propose(const MaskedText&, unsigned) const override {
        throw std::runtime_error("backend down");
    }
};

} // namespace

TEST(MaskTargets, LexiconWordsFirstThenLongestContentWord) {
    EXPECT_EQ(select_mask_targets("The food was fantastic"), (std::vector<std::size_t>{1, 3}));
    const auto words = split_words("the zebra crossing");
    const auto t = select_mask_targets("the zebra crossing");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(words[t[0]], "crossing");
    EXPECT_EQ(select_mask_targets("it is"), (std::vector<std::size_t>{0}));
    EXPECT_TRUE(select_mask_targets("").empty());
}

TEST(Candidates, SynonymFillsAreDistinctFromSource) {
    const auto c = generate_candidates("The food was fantastic", {3}, SynonymProvider{}, 2);
    ASSERT_EQ(c.size(), 2u);
    const auto& syn = lexicon::synonyms_of("fantastic");
    EXPECT_EQ(c[0], "the food was " + syn[0]);
    EXPECT_EQ(c[1], "the food was " + syn[1]);
    EXPECT_TRUE(generate_candidates("The food was fantastic", {3}, SynonymProvider{}, 0).empty());
    EXPECT_THROW(generate_candidates("short", {4}, SynonymProvider{}, 1), InputError);
}

TEST(Candidates, ProviderFailureSurfacesAsProviderError) {
    try {
        generate_candidates("The food was fantastic", {3}, ThrowingProvider{}, 2);
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.provider(), "broken");
    }
}

TEST(Rationale, BecauseClauseNamesIdentifier) {
    EXPECT_EQ(add_rationale_variant("The service was fantastic.", 1, "fantastic"),
              "The service was fantastic because \"fantastic\" expresses strong sentiment.");
    EXPECT_THROW(add_rationale_variant("The service was fantastic", 1, "awful"), InputError);
}

TEST(Restyle, ContractionsBothWays) {
    EXPECT_EQ(restyle("I don't like it", Style::formal), "i do not like it");
    EXPECT_EQ(restyle("I can't stay", Style::formal), "i can not stay");
    EXPECT_EQ(restyle("It was not good", Style::informal), "it wasn't good");
    EXPECT_EQ(style_variant("It isn't good"), "it is not good");
    EXPECT_EQ(style_variant("It is not good"), "it isn't good");
}

TEST(Filter, ConstantJudges) {
    const std::vector<AugmentedSample> c{{"s", "a", 1, Provenance::style, "style"},
                                         {"s", "b", 0, Provenance::style, "style"},
                                         {"s", "c", 1, Provenance::style, "style"}};
    EXPECT_EQ(filter_consistent(c, [](const std::string&) { return std::size_t{1}; }).retained.size(), 2u);
    const auto none = filter_consistent(c, [](const std::string&) { return std::size_t{5}; });
    EXPECT_TRUE(none.retained.empty());
    EXPECT_EQ(none.considered, 3u);
    EXPECT_DOUBLE_EQ(none.retention_rate(), 0.0);
    const auto keyed = filter_consistent(c, [](const std::string& t) { return t == "b" ? std::size_t{0} : 1; });
    EXPECT_EQ(keyed.retained.size(), 3u);
}

TEST(AugmentCorpus, PermissiveJudgeMatchesEnumeration) {
    // One label everywhere, so a constant judge agrees with every candidate.
    auto corpus = make_synthetic_corpus(5, 2, 11);
    ASSERT_EQ(corpus.size(), 10u);
    for (auto& s : corpus.samples) s.label = 0;
    const Judge permissive = [](const std::string&) { return std::size_t{0}; };
    for (unsigned k : {1u, 2u, 3u, 6u}) {
        std::size_t expected = 0;
        for (const auto& s : corpus.samples) expected += std::min<std::size_t>(k, oracle_pool(s.text, k));
        const auto r = augment_corpus(corpus, SynonymProvider{}, k, permissive, 1);
        EXPECT_EQ(r.report.considered, expected) << "k=" << k;
        EXPECT_EQ(r.report.retained, expected) << "k=" << k;
        EXPECT_EQ(r.corpus.size(), 10 + expected) << "k=" << k;
        EXPECT_DOUBLE_EQ(r.report.retention_rate(), 1.0);
    }
}

TEST(AugmentCorpus, RetainedAgreeWithJudgeAndSeedIsReproducible) {
    const auto corpus = make_synthetic_corpus(30, 2, 2);
    const auto judge = KeywordPolarityJudge::fit(corpus);
    const Judge j = [&](const std::string& t) { return judge(t); };
    const auto a = augment_corpus(corpus, SynonymProvider{}, 3, j, 5);
    const auto b = augment_corpus(corpus, SynonymProvider{}, 3, j, 5);
    EXPECT_EQ(a.added, b.added);
    ASSERT_FALSE(a.added.empty());
    for (const auto& s : a.added) EXPECT_EQ(judge(s.text), s.label) << s.text;
    EXPECT_LE(a.report.retained, a.report.considered);
    EXPECT_EQ(a.report.retained, a.added.size());
    std::size_t per_class = 0;
    for (auto n : a.report.retained_per_class) per_class += n;
    EXPECT_EQ(per_class, a.report.retained);
    std::set<Provenance> kinds;
    for (const auto& s : a.added) kinds.insert(s.provenance);
    EXPECT_EQ(kinds.size(), 3u);
}

TEST(AugmentCorpus, ZeroKAndRejectingJudge) {
    const auto corpus = make_synthetic_corpus(5, 2, 3);
    EXPECT_EQ(augment_corpus(corpus, SynonymProvider{}, 0, Judge{}, 1).corpus, corpus);
    const auto none = augment_corpus(corpus, SynonymProvider{}, 3, [](const std::string&) { return std::size_t{9}; }, 1);
    EXPECT_EQ(none.corpus, corpus);
    EXPECT_GT(none.report.considered, 0u);
}

TEST(KeywordJudge, LearnsPolarityAndNegation) {
    LabeledCorpus c;
    c.label_names = {"negative", "positive"};
    c.samples = {{"great fun", 1}, {"great cast", 1}, {"awful plot", 0}, {"awful cast", 0}, {"not great", 0}};
    const auto judge = KeywordPolarityJudge::fit(c);
    EXPECT_EQ(judge.num_classes(), 2u);
    EXPECT_EQ(judge("great"), 1u);
    EXPECT_EQ(judge("awful"), 0u);
    EXPECT_EQ(judge("not great"), 0u);
    EXPECT_EQ(judge_features("Not great fun"), (std::vector<std::string>{"not_great", "fun"}));
}

TEST(ExchangeCsv, OfflineProviderRoundTrip) {
    std::ostringstream out;
    write_exchange_csv(out, {{"The plot was dull.", "The story was boring.", "negative", "t5-paraphrase"},
                             {"The plot was dull.", "A tedious, \"flat\" plot.", "negative", "t5-paraphrase"},
                             {"Great cast.", "Wonderful actors.", "positive", "t5-paraphrase"}});
    std::istringstream in(out.str());
    const auto p = OfflineParaphraseProvider::read(in);
    EXPECT_EQ(p.name(), "t5-paraphrase");
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(p.kind(), ProviderKind::paraphrase);
    MaskedText m{"The plot was dull.", split_words("The plot was dull."), 3};
    EXPECT_EQ(p.propose(m, 5), (std::vector<std::string>{"The story was boring.", "A tedious, \"flat\" plot."}));
    EXPECT_EQ(p.propose(m, 1).size(), 1u);
    const auto c = generate_candidates("The plot was dull.", {3}, p, 5);
    EXPECT_EQ(c, (std::vector<std::string>{"the story was boring .", "a tedious , \" flat \" plot ."}));
}

TEST(ExchangeCsv, WrongHeaderOrArityRejected) {
    std::istringstream header("source,target,label,provider\n");
    EXPECT_THROW(OfflineParaphraseProvider::read(header), ParseError);
    std::istringstream arity("source_text,augmented_text,label,provider\na,b,c\n");
    EXPECT_THROW(OfflineParaphraseProvider::read(arity), ParseError);
}

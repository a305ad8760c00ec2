#include "mrfe/config.hpp"
#include "mrfe/corpus.hpp"
#include "mrfe/csv.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/instruction.hpp"
#include "mrfe/run_config.hpp"
#include "mrfe/vocab.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mrfe;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mrfe_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Instruction, ListingExampleVerbatim) {
    const auto reg = TemplateRegistry::builtin();
    EXPECT_EQ(apply_instruction("The restaurant was fantastic.", std::nullopt, reg.by_id("plain"),
                                "The review is positive", "fantastic"),
              "Review: \"The restaurant was fantastic.\" Comment: The review is positive because \"fantastic\" "
              "expresses strong sentiment.");
}

TEST(Instruction, DomainDirectiveIsPrefixAndReviewIsSubstring) {
    const auto reg = TemplateRegistry::builtin();
    for (const char* domain : {"movie", "restaurant", "tweet", "product"}) {
        const auto matches = reg.by_domain(domain);
        ASSERT_FALSE(matches.empty()) << domain;
        const std::string x = "Loved every minute, truly.";
        const auto out = apply_instruction(x, std::string("Seen on a Tuesday."), *matches.front());
        EXPECT_EQ(out.rfind(domain_directive(domain), 0), 0u) << out;
        EXPECT_NE(out.find(x), std::string::npos);
        EXPECT_NE(out.find("Seen on a Tuesday."), std::string::npos);
    }
}

TEST(Instruction, BareReviewUnquotedAndBlankRejected) {
    const auto reg = TemplateRegistry::builtin();
    EXPECT_EQ(apply_instruction("ok", std::nullopt, reg.by_id("plain")), "Review: ok");
    EXPECT_EQ(apply_instruction("ok", std::nullopt, reg.by_id("plain"), "Fine", std::nullopt),
              "Review: \"ok\" Comment: Fine.");
    EXPECT_THROW(apply_instruction("  ", std::nullopt, reg.by_id("plain")), InputError);
}

TEST(TemplateRegistry, DuplicatesAndUnknownIdsRejected) {
    auto reg = TemplateRegistry::builtin();
    InstructionTemplate t;
    t.pattern_id = "plain";
    EXPECT_THROW(reg.add(t), RegistryError);
    EXPECT_THROW(reg.by_id("nope"), RegistryError);
    EXPECT_TRUE(reg.contains("movie-review"));
}

TEST(TemplateFile, RoundTripsAndReportsLines) {
    std::istringstream in("# custom\npattern_id = hotel\ndomain = hotel\nprefix = This is a hotel review.\nconnector = since\n");
    const auto ts = parse_templates(in);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].prefix, "This is a hotel review.");
    EXPECT_EQ(ts[0].connector, "since");
    std::ostringstream out;
    write_templates(out, ts);
    std::istringstream back(out.str());
    const auto again = parse_templates(back);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again[0].pattern_id, "hotel");
    EXPECT_EQ(again[0].domain, "hotel");
    EXPECT_EQ(again[0].prefix, ts[0].prefix);

    std::istringstream bad("domain = x\n");
    try {
        parse_templates(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(SplitWords, LowercasesPunctuationAndContractions) {
    EXPECT_EQ(split_words("Don't GO, now!"), (std::vector<std::string>{"do", "n't", "go", ",", "now", "!"}));
    EXPECT_TRUE(split_words("   ").empty());
}

TEST(Encode, AddsSpecialsTruncatesKeepsSep) {
    const auto vocab = Vocab::from_tokens({"good", "film"});
    const auto seq = encode("Good film indeed", vocab, 64);
    EXPECT_EQ(seq.ids, (std::vector<std::size_t>{kClsId, 5, 6, kUnkId, kSepId}));
    const auto cut = encode("good film good film", vocab, 4);
    EXPECT_EQ(cut.ids, (std::vector<std::size_t>{kClsId, 5, 6, kSepId}));
    EXPECT_EQ(cut.tokens.back(), "[SEP]");
    EXPECT_THROW(encode("x", vocab, 2), ConfigError);
}

TEST(BuildVocab, FrequencyThenLexicographicWithCap) {
    const auto v = build_vocab({"b a a", "c b a"}, kNumSpecials + 2);
    EXPECT_EQ(v.size(), kNumSpecials + 2);
    EXPECT_EQ(v.token_of(kNumSpecials), "a");
    EXPECT_EQ(v.token_of(kNumSpecials + 1), "b");
    EXPECT_THROW(build_vocab({}, 100), InputError);
}

TEST(Vocab, SaveLoadRoundTrip) {
    const auto dir = temp_dir("vocab");
    const auto v = Vocab::from_tokens({"x", "y", "z"});
    v.save(dir / "v.txt");
    EXPECT_EQ(Vocab::load(dir / "v.txt"), v);
    EXPECT_THROW(Vocab::from_tokens({"x", "x"}), std::exception);
}

TEST(Csv, QuotedFieldsAndEscaping) {
    std::istringstream in("a,b\n\"x, \"\"y\"\"\",2\n\"multi\nline\",3\n");
    const auto rows = csv::read(in);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].fields[0], "x, \"y\"");
    EXPECT_EQ(rows[2].fields[0], "multi\nline");
    EXPECT_EQ(csv::escape("he said \"hi\""), "\"he said \"\"hi\"\"\"");
    std::istringstream bad("a\n\"open\n");
    EXPECT_THROW(csv::read(bad), ParseError);
}

TEST(LoadCsv, TwoRowsAndOrderPreserved) {
    std::istringstream in("text,label\nGreat.,positive\nAwful.,negative\n");
    const auto c = read_csv(in, "text", "label", LabelMapping::preset("sentiment"));
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.samples[0], (Sample{"Great.", 1}));
    EXPECT_EQ(c.samples[1], (Sample{"Awful.", 0}));
}

TEST(LoadCsv, UnknownLabelNamesLine) {
    std::istringstream in("text,label\nfine,positive\nmeh,neutral\n");
    try {
        read_csv(in, "text", "label", LabelMapping::preset("sentiment"));
        FAIL();
    } catch (const LabelError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(LoadCsv, MissingColumnAndEmptyText) {
    std::istringstream a("review,label\nx,1\n");
    EXPECT_THROW(read_csv(a, "text", "label", LabelMapping::preset("binary01")), ParseError);
    std::istringstream b("text,label\n,1\n");
    EXPECT_THROW(read_csv(b, "text", "label", LabelMapping::preset("binary01")), std::exception);
}

TEST(LabelPresets, YelpAndAmazonConventions) {
    std::istringstream yelp("text,stars\na,1\nb,5\nc,3\n");
    const auto y = read_csv(yelp, "text", "stars", LabelMapping::preset("yelp5"));
    EXPECT_EQ(y.num_classes(), 5u);
    EXPECT_EQ(y.samples[0].label, 0u);
    EXPECT_EQ(y.samples[1].label, 4u);
    EXPECT_EQ(y.samples[2].label, 2u);

    std::istringstream amazon("text,stars\na,1\nb,3\nc,4\n");
    const auto a = read_csv(amazon, "text", "stars", LabelMapping::preset("amazon_stars"));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a.samples[0].label, 0u);
    EXPECT_EQ(a.samples[1].label, 1u);
    EXPECT_THROW(LabelMapping::preset("imdb"), ConfigError);
}

TEST(LoadCsv, SaveLoadRoundTrip) {
    const auto dir = temp_dir("csv");
    const auto c = make_synthetic_corpus(20, 3, 4);
    save_csv(dir / "c.csv", c);
    const auto back = load_csv(dir / "c.csv", "text", "label", LabelMapping::identity(c.label_names), c.domain);
    EXPECT_EQ(back, c);
}

TEST(SyntheticCorpus, SizesSeedAndNegationRate) {
    const auto small = make_synthetic_corpus(5, 2, 1);
    EXPECT_EQ(small.size(), 10u);
    EXPECT_EQ(make_synthetic_corpus(50, 2, 9), make_synthetic_corpus(50, 2, 9));
    EXPECT_NE(make_synthetic_corpus(50, 2, 9), make_synthetic_corpus(50, 2, 10));

    const auto big = make_synthetic_corpus(1000, 2, 3);
    std::vector<std::size_t> negated(2, 0), total(2, 0);
    for (const auto& s : big.samples) {
        ++total[s.label];
        negated[s.label] += is_negated_synthetic(s) ? 1 : 0;
    }
    EXPECT_EQ(total, (std::vector<std::size_t>{1000, 1000}));
    EXPECT_EQ(negated, (std::vector<std::size_t>{100, 100}));
    big.validate();
}

TEST(KeyValue, ParsesAndRejects) {
    std::istringstream in("# c\nepochs = 3\n\nlr=0.01\n");
    const auto kv = parse_kv(in);
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv[1].key, "lr");
    EXPECT_EQ(kv[1].line, 4u);
    std::istringstream dup("a=1\na=2\n");
    EXPECT_THROW(parse_kv(dup), ParseError);
    std::istringstream noeq("a\n");
    EXPECT_THROW(parse_kv(noeq), ParseError);
    EXPECT_THROW(parse_size("epochs", "-1"), ConfigError);
    EXPECT_THROW(parse_bool("gate_on", "maybe"), ConfigError);
    EXPECT_EQ(parse_double("lr", format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(RunConfig, DefaultsThenFileThenFlags) {
    const auto dir = temp_dir("runcfg");
    {
        std::ofstream f(dir / "run.cfg");
        f << "epochs = 7\nkernels = 3,5\nlr = 0.01\n";
    }
    RunConfig cfg;
    EXPECT_EQ(cfg.train.epochs, 20u);
    EXPECT_EQ(cfg.train.batch_size, 64u);
    cfg.apply_file(dir / "run.cfg");
    cfg.apply("epochs", "9");
    EXPECT_EQ(cfg.train.epochs, 9u);                                   // flag beats file
    EXPECT_EQ(cfg.model.kernels, (std::vector<std::size_t>{3, 5}));    // file beats default
    EXPECT_EQ(cfg.train.lr, 0.01);
    EXPECT_EQ(cfg.train.batch_size, 64u);                              // default kept
}

TEST(RunConfig, UnknownKeysRejectedWithLine) {
    const auto dir = temp_dir("runcfg_bad");
    {
        std::ofstream f(dir / "run.cfg");
        f << "epochs = 2\nlearning_rate = 1\n";
    }
    RunConfig cfg;
    try {
        cfg.apply_file(dir / "run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(cfg.apply("nope", "1"), ConfigError);
}

TEST(RunConfig, EveryKeyRoundTrips) {
    RunConfig a;
    a.model.kernels = {1, 3};
    a.train.lr = 3e-4;
    a.labels = "yelp5";
    RunConfig b;
    for (const auto& [k, v] : a.to_kv()) b.apply(k, v);
    EXPECT_EQ(b.to_kv(), a.to_kv());
    EXPECT_EQ(RunConfig::keys().size(), a.to_kv().size());
}

TEST(RunConfig, VariantImpliesAugmentationSetting) {
    RunConfig cfg;
    cfg.apply("variant", "ci_mrfe");
    EXPECT_FALSE(cfg.model.use_sea);
    cfg.model.validate();
    cfg.apply("use_sea", "true");
    EXPECT_THROW(cfg.model.validate(), ConfigError);
}

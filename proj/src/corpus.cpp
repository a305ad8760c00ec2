#include "mrfe/corpus.hpp"

#include "mrfe/csv.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/lexicon.hpp"
#include "mrfe/random.hpp"
#include "mrfe/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace mrfe::inline MRFE_PRECISION {

std::vector<std::string> LabeledCorpus::texts() const {
    std::vector<std::string> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.text);
    return out;
}

void LabeledCorpus::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label >= label_names.size()) {
            throw LabelError("sample " + std::to_string(i) + ": label " + std::to_string(samples[i].label) +
                             " outside " + std::to_string(label_names.size()) + " classes");
        }
        if (trim(samples[i].text).empty()) throw InputError("sample " + std::to_string(i) + ": empty text");
    }
}

LabelMapping LabelMapping::identity(std::vector<std::string> names) {
    LabelMapping m;
    for (std::size_t i = 0; i < names.size(); ++i) m.raw_to_index.emplace(names[i], i);
    m.names = std::move(names);
    return m;
}

LabelMapping LabelMapping::preset(const std::string& name) {
    if (name == "binary01") {
        LabelMapping m;
        m.names = {"negative", "positive"};
        m.raw_to_index = {{"0", 0}, {"1", 1}};
        return m;
    }
    if (name == "yelp5") {
        LabelMapping m;
        m.names = {"1", "2", "3", "4", "5"};
        for (std::size_t i = 0; i < 5; ++i) m.raw_to_index.emplace(std::to_string(i + 1), i);
        return m;
    }
    if (name == "amazon_stars") {
        LabelMapping m;
        m.names = {"negative", "positive"};
        m.raw_to_index = {{"1", 0}, {"2", 0}, {"4", 1}, {"5", 1}};
        m.skipped = {"3"};
        return m;
    }
    if (name == "sentiment") return identity({"negative", "positive"});
    throw ConfigError("unknown label preset '" + name + "'");
}

LabeledCorpus read_csv(std::istream& in, const std::string& text_column, const std::string& label_column,
                       const LabelMapping& mapping, const std::string& domain) {
    const auto records = csv::read(in);
    if (records.empty()) throw ParseError("csv: missing header row");
    const auto& header = records.front().fields;
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ParseError("csv line " + std::to_string(records.front().line) + ": missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto text_idx = column(text_column);
    const auto label_idx = column(label_column);

    LabeledCorpus corpus;
    corpus.label_names = mapping.names;
    corpus.domain = domain;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw ParseError("csv line " + std::to_string(rec.line) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(rec.fields.size()));
        }
        const auto raw = trim(rec.fields[label_idx]);
        if (mapping.skipped.count(raw)) continue;
        auto it = mapping.raw_to_index.find(raw);
        if (it == mapping.raw_to_index.end()) {
            throw LabelError("csv line " + std::to_string(rec.line) + ": unknown label '" + raw + "'");
        }
        if (trim(rec.fields[text_idx]).empty()) {
            throw InputError("csv line " + std::to_string(rec.line) + ": empty text");
        }
        corpus.samples.push_back({rec.fields[text_idx], it->second});
    }
    return corpus;
}

LabeledCorpus load_csv(const std::filesystem::path& path, const std::string& text_column,
                       const std::string& label_column, const LabelMapping& mapping, const std::string& domain) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open csv file " + path.string());
    return read_csv(in, text_column, label_column, mapping, domain);
}

void write_csv(std::ostream& out, const LabeledCorpus& corpus) {
    csv::write_row(out, {"text", "label"});
    for (const auto& s : corpus.samples) csv::write_row(out, {s.text, corpus.label_names.at(s.label)});
}

void save_csv(const std::filesystem::path& path, const LabeledCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write csv file " + path.string());
    write_csv(out, corpus);
}

namespace {

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "the", "a", "movie", "plot", "actors", "scene", "story", "was", "is", "and", "it", "this",
        "really", "quite", "film", "ending", "music", "characters", "overall", "i", "thought", "felt",
        "with", "of", "cast", "director", "script", "camera", "moments", "dialogue",
    };
    return words;
}

// Keyword pools: the first three members of every adjective group.
std::vector<std::vector<std::string>> keyword_pools(std::size_t classes) {
    const auto& groups = lexicon::synonym_groups();
    constexpr std::size_t kPositiveGroups = 19;
    constexpr std::size_t kAdjectiveGroups = 35;
    std::vector<std::vector<std::string>> pools(classes);
    if (classes == 2) {
        for (std::size_t g = 0; g < kAdjectiveGroups; ++g) {
            auto& pool = pools[g < kPositiveGroups ? 1 : 0];
            pool.insert(pool.end(), groups[g].begin(), groups[g].begin() + 3);
        }
        return pools;
    }
    for (std::size_t g = 0; g < kAdjectiveGroups; ++g) {
        auto& pool = pools[g % classes];
        pool.insert(pool.end(), groups[g].begin(), groups[g].begin() + 3);
    }
    return pools;
}

std::size_t opposite_class(std::size_t c, std::size_t classes) {
    const std::size_t mirror = classes - 1 - c;
    return mirror != c ? mirror : (c + 1) % classes;
}

} // namespace

LabeledCorpus make_synthetic_corpus(std::size_t per_class, std::size_t classes, std::uint64_t seed) {
    if (per_class < 1) throw ConfigError("synthetic corpus needs at least one sample per class");
    if (classes < 2 || classes > 5) throw ConfigError("synthetic corpus supports 2 to 5 classes");

    std::mt19937_64 rng(seed);
    const auto pools = keyword_pools(classes);
    LabeledCorpus corpus;
    corpus.domain = "movie";
    if (classes == 2) {
        corpus.label_names = {"negative", "positive"};
    } else {
        for (std::size_t c = 0; c < classes; ++c) corpus.label_names.push_back("class" + std::to_string(c));
    }

    const auto negated_per_class =
        static_cast<std::size_t>(std::floor(static_cast<double>(per_class) * kSyntheticNegationRate + 0.5));
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<bool> negated(per_class, false);
        std::fill(negated.begin(), negated.begin() + static_cast<long>(negated_per_class), true);
        seeded_shuffle(negated, rng);
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<std::string> words;
            const std::size_t filler = 4 + pick_index(5, rng);
            for (std::size_t w = 0; w < filler; ++w) words.push_back(pick(filler_words(), rng));
            if (negated[i]) {
                const auto& kw = pick(pools[opposite_class(c, classes)], rng);
                const auto at = pick_index(words.size() + 1, rng);
                words.insert(words.begin() + static_cast<long>(at), {"not", kw});
            } else {
                const std::size_t keywords = 1 + pick_index(2, rng);
                for (std::size_t k = 0; k < keywords; ++k) {
                    const auto at = pick_index(words.size() + 1, rng);
                    words.insert(words.begin() + static_cast<long>(at), pick(pools[c], rng));
                }
            }
            std::string text = join(words, " ") + ".";
            text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
            corpus.samples.push_back({std::move(text), c});
        }
    }
    seeded_shuffle(corpus.samples, rng);
    return corpus;
}

bool is_negated_synthetic(const Sample& sample) {
    const auto words = split(to_lower(sample.text), ' ');
    return std::find(words.begin(), words.end(), "not") != words.end();
}

} // namespace mrfe

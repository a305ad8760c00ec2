#include "mrfe/lexicon.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace mrfe::inline MRFE_PRECISION::lexicon {

const std::vector<std::vector<std::string>>& synonym_groups() {
    static const std::vector<std::vector<std::string>> groups = {
        // positive adjectives
        {"fantastic", "wonderful", "excellent", "superb", "terrific"},
        {"great", "outstanding", "remarkable", "splendid", "marvelous"},
        {"good", "fine", "decent", "solid", "nice"},
        {"amazing", "astonishing", "stunning", "incredible", "extraordinary"},
        {"delicious", "tasty", "flavorful", "scrumptious", "delectable"},
        {"friendly", "welcoming", "warm", "cordial", "hospitable"},
        {"beautiful", "lovely", "gorgeous", "elegant", "charming"},
        {"enjoyable", "pleasant", "delightful", "pleasing", "agreeable"},
        {"brilliant", "masterful", "inspired", "exceptional", "impressive"},
        {"happy", "glad", "pleased", "content", "satisfied"},
        {"reliable", "dependable", "sturdy", "durable", "trustworthy"},
        {"funny", "hilarious", "witty", "amusing", "humorous"},
        {"fast", "quick", "speedy", "prompt", "swift"},
        {"clean", "spotless", "tidy", "neat", "pristine"},
        {"affordable", "inexpensive", "economical", "reasonable", "budget"},
        {"helpful", "attentive", "accommodating", "considerate", "supportive"},
        {"perfect", "flawless", "ideal", "impeccable", "faultless"},
        {"exciting", "thrilling", "gripping", "riveting", "captivating"},
        {"love", "adore", "cherish", "treasure", "relish"},
        // negative adjectives
        {"terrible", "awful", "dreadful", "horrible", "atrocious"},
        {"bad", "poor", "inferior", "lousy", "shoddy"},
        {"boring", "dull", "tedious", "monotonous", "bland"},
        {"rude", "impolite", "disrespectful", "discourteous", "surly"},
        {"disappointing", "underwhelming", "unsatisfying", "lackluster", "mediocre"},
        {"slow", "sluggish", "plodding", "tardy", "lethargic"},
        {"dirty", "filthy", "grimy", "messy", "unclean"},
        {"expensive", "overpriced", "pricey", "costly", "exorbitant"},
        {"broken", "defective", "faulty", "damaged", "malfunctioning"},
        {"annoying", "irritating", "aggravating", "bothersome", "infuriating"},
        {"ugly", "unsightly", "hideous", "unattractive", "unappealing"},
        {"stupid", "silly", "pointless", "senseless", "foolish"},
        {"sad", "unhappy", "miserable", "gloomy", "depressing"},
        {"weak", "flimsy", "fragile", "frail", "feeble"},
        {"hate", "loathe", "detest", "despise", "abhor"},
        {"worst", "poorest", "lowest", "weakest", "dismal"},
        // domain nouns
        {"movie", "film", "picture", "feature", "production"},
        {"food", "meal", "dish", "cuisine", "fare"},
        {"service", "staff", "team", "crew", "personnel"},
        {"plot", "story", "storyline", "narrative", "script"},
        {"product", "item", "device", "gadget", "purchase"},
    };
    return groups;
}

namespace {

struct SynonymIndex {
    std::unordered_map<std::string, std::vector<std::string>> table;
};

const SynonymIndex& index() {
    static const SynonymIndex idx = [] {
        SynonymIndex s;
        for (const auto& group : synonym_groups()) {
            for (const auto& w : group) {
                auto& out = s.table[w];
                for (const auto& other : group) {
                    if (other != w) out.push_back(other);
                }
            }
        }
        return s;
    }();
    return idx;
}

} // namespace

const std::vector<std::string>& synonyms_of(std::string_view word) {
    static const std::vector<std::string> none;
    const auto& t = index().table;
    auto it = t.find(std::string(word));
    return it == t.end() ? none : it->second;
}

bool is_maskable(std::string_view word) { return index().table.count(std::string(word)) != 0; }

bool is_stopword(std::string_view word) {
    static const std::unordered_set<std::string> stop = {
        "a",     "an",   "the",   "and",  "or",    "but",   "if",    "then", "so",   "of",   "at",
        "by",    "for",  "with",  "about", "to",   "from",  "in",    "on",   "is",   "are",  "was",
        "were",  "be",   "been",  "being", "it",   "its",   "this",  "that", "these", "those", "i",
        "me",    "my",   "we",    "our",  "you",   "your",  "he",    "she",  "they", "them", "their",
        "his",   "her",  "as",    "do",   "does",  "did",   "have",  "has",  "had",  "will", "would",
        "there", "here", "very",  "too",  "just",  "also",  "than",  "all",  "any",  "some", "such",
        "what",  "which", "who",  "whom", "when",  "where", "why",   "how",  "can",  "could", "should",
    };
    return stop.count(std::string(word)) != 0;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& emotion_seeds() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> seeds = {
        {"joy", {"happy", "joy", "delight", "cheerful", "glad", "wonderful", "love", "fun", "great", "enjoyable"}},
        {"trust", {"reliable", "trust", "honest", "faithful", "dependable", "safe", "loyal", "sure", "solid", "secure"}},
        {"fear", {"afraid", "fear", "scary", "terrified", "panic", "dread", "nervous", "horror", "anxious", "worried"}},
        {"surprise", {"surprise", "amazing", "unexpected", "astonishing", "shock", "sudden", "wow", "stunning",
                      "incredible", "remarkable"}},
        {"sadness", {"sad", "unhappy", "miserable", "gloomy", "depressing", "cry", "tears", "lonely", "sorrow",
                     "disappointing"}},
        {"disgust", {"disgusting", "gross", "filthy", "nasty", "dirty", "revolting", "awful", "horrible", "vile",
                     "terrible"}},
        {"anger", {"angry", "rude", "furious", "annoying", "hate", "rage", "irritating", "mad", "outrage", "hostile"}},
        {"anticipation", {"exciting", "eager", "hope", "await", "anticipate", "expect", "thrilling", "ready",
                          "soon", "promising"}},
    };
    return seeds;
}

const std::vector<std::string>& negation_cues() {
    static const std::vector<std::string> cues = {"not", "no", "never", "n't", "hardly"};
    return cues;
}

const std::vector<std::string>& hedge_cues() {
    static const std::vector<std::string> cues = {"slightly", "somewhat", "barely", "a-bit"};
    return cues;
}

} // namespace mrfe::lexicon

#pragma once

#include "mrfe/precision.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct Sample {
    std::string text;
    std::size_t label = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct LabeledCorpus {
    std::vector<Sample> samples;
    std::vector<std::string> label_names;
    std::string domain;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t num_classes() const noexcept { return label_names.size(); }
    std::vector<std::string> texts() const;
    // Throws LabelError / InputError when a label or text breaks the invariants.
    void validate() const;

    friend bool operator==(const LabeledCorpus&, const LabeledCorpus&) = default;
};

/// Maps raw label strings of a CSV column to class indices.
struct LabelMapping {
    std::vector<std::string> names;
    std::map<std::string, std::size_t> raw_to_index;
    std::set<std::string> skipped;   // raw values dropped on purpose (e.g. 3-star reviews)

    // Each name maps to its own position.
    static LabelMapping identity(std::vector<std::string> names);
    // "binary01" (Twitter/IMDb 0/1), "yelp5" (1..5 → 0..4), "amazon_stars"
    // (<3 negative, >3 positive, 3 skipped), "sentiment" (negative/positive).
    static LabelMapping preset(const std::string& name);
};

/// Reads an RFC 4180 CSV with a header row. Unknown labels, missing columns and
/// empty texts raise errors naming the offending line.
LabeledCorpus load_csv(const std::filesystem::path& path, const std::string& text_column,
                       const std::string& label_column, const LabelMapping& mapping,
                       const std::string& domain = "");
LabeledCorpus read_csv(std::istream& in, const std::string& text_column, const std::string& label_column,
                       const LabelMapping& mapping, const std::string& domain = "");

// Header "text,label"; labels written by name.
void write_csv(std::ostream& out, const LabeledCorpus& corpus);
void save_csv(const std::filesystem::path& path, const LabeledCorpus& corpus);

inline constexpr double kSyntheticNegationRate = 0.1;

/// Toy corpus: class keyword pools mixed with shared filler. One in ten
/// samples per class instead carries "not" + a keyword of the opposite class.
LabeledCorpus make_synthetic_corpus(std::size_t per_class, std::size_t classes, std::uint64_t seed);

// True when the sample was built as a negated construction.
bool is_negated_synthetic(const Sample& sample);

} // namespace mrfe

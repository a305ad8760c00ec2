#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/config.hpp"
#include "mrfe/corpus.hpp"
#include "mrfe/model.hpp"
#include "mrfe/training.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

/// Everything a command-line run needs: model and training settings plus paths.
/// Built from defaults, then a key=value file, then flags.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
    std::string data;                   // CSV corpus; empty: the synthetic corpus
    std::string text_column = "text";
    std::string label_column = "label";
    std::string labels = "sentiment";   // preset name or comma-separated class names
    std::string embeddings;             // contextual embedding file
    std::string paraphrases;            // paraphrase exchange CSV for augmentation
    std::string out = "mrfe_out";
    std::size_t synthetic_per_class = 1000;
    std::size_t synthetic_classes = 2;

    // Throws ConfigError on an unknown key or a bad value.
    void apply(const std::string& key, const std::string& value);
    // Entries of a key=value file; errors name the file and line.
    void apply_file(const std::filesystem::path& path);
    void apply_entries(const std::vector<KvEntry>& entries, const std::string& source);

    std::map<std::string, std::string> to_kv() const;
    static std::vector<std::string> keys();

    LabelMapping label_mapping() const;
    // The CSV at `data`, or the synthetic corpus drawn with train.seed.
    LabeledCorpus load_corpus() const;
};

} // namespace mrfe

#include "mrfe/run_config.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/text_util.hpp"

#include <algorithm>

namespace mrfe::inline MRFE_PRECISION {

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (model.apply(key, value) || train.apply(key, value)) return;
    if (key == "data") data = value;
    else if (key == "text_column") text_column = value;
    else if (key == "label_column") label_column = value;
    else if (key == "labels") labels = value;
    else if (key == "embeddings") embeddings = value;
    else if (key == "paraphrases") paraphrases = value;
    else if (key == "out") out = value;
    else if (key == "synthetic_per_class") synthetic_per_class = parse_size(key, value);
    else if (key == "synthetic_classes") synthetic_classes = parse_size(key, value);
    else throw ConfigError("unknown key '" + key + "'");
}

void RunConfig::apply_entries(const std::vector<KvEntry>& entries, const std::string& source) {
    for (const auto& e : entries) {
        try {
            apply(e.key, e.value);
        } catch (const ConfigError& err) {
            throw ConfigError(source + " line " + std::to_string(e.line) + ": " + err.what());
        }
    }
}

void RunConfig::apply_file(const std::filesystem::path& path) { apply_entries(load_kv(path), path.string()); }

std::map<std::string, std::string> RunConfig::to_kv() const {
    auto kv = model.to_kv();
    kv.merge(train.to_kv());
    kv["data"] = data;
    kv["text_column"] = text_column;
    kv["label_column"] = label_column;
    kv["labels"] = labels;
    kv["embeddings"] = embeddings;
    kv["paraphrases"] = paraphrases;
    kv["out"] = out;
    kv["synthetic_per_class"] = std::to_string(synthetic_per_class);
    kv["synthetic_classes"] = std::to_string(synthetic_classes);
    return kv;
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> k;
    for (const auto& [key, _] : RunConfig{}.to_kv()) k.push_back(key);
    return k;
}

LabelMapping RunConfig::label_mapping() const {
    for (const char* preset : {"binary01", "yelp5", "amazon_stars", "sentiment"}) {
        if (labels == preset) return LabelMapping::preset(labels);
    }
    std::vector<std::string> names;
    for (auto& n : split(labels, ',')) {
        auto t = trim(n);
        if (!t.empty()) names.emplace_back(t);
    }
    if (names.size() < 2) throw ConfigError("labels needs a preset name or at least two class names");
    return LabelMapping::identity(std::move(names));
}

LabeledCorpus RunConfig::load_corpus() const {
    if (data.empty()) return make_synthetic_corpus(synthetic_per_class, synthetic_classes, train.seed);
    return load_csv(data, text_column, label_column, label_mapping(), model.domain);
}

} // namespace mrfe

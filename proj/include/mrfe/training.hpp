#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/augmentation.hpp"
#include "mrfe/corpus.hpp"
#include "mrfe/embedding.hpp"
#include "mrfe/metrics.hpp"
#include "mrfe/model.hpp"
#include "mrfe/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 13;
    double train_ratio = 0.8;
    double dev_ratio = 0.1;
    double test_ratio = 0.1;
    std::size_t sea_k = 3;             // augmentation candidates kept per source
    std::size_t vocab_size = 20000;    // including specials
    bool model_judge = true;           // re-filter augmentations with the model after epoch 1

    // Throws ConfigError unless the ratios are positive and sum to 1 and the sizes are positive.
    void validate() const;
    AdamWConfig optimizer() const;

    std::map<std::string, std::string> to_kv() const;
    bool apply(const std::string& key, const std::string& value);
    static const std::vector<std::string>& keys();

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Split {
    LabeledCorpus train, dev, test;
};

/// Seeded shuffle, then floor(n·dev) dev and floor(n·test) test samples with
/// the remainder in train. Throws InputError below 10 samples.
Split split(const LabeledCorpus& corpus, double train_ratio, double dev_ratio, double test_ratio,
            std::uint64_t seed);
Split split(const LabeledCorpus& corpus, const TrainConfig& cfg);

// Index form of split for data without texts.
struct SplitIndices {
    std::vector<std::size_t> train, dev, test;
};
SplitIndices split_indices(std::size_t n, double train_ratio, double dev_ratio, double test_ratio,
                           std::uint64_t seed);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0;           // mean per-sample training loss
    double dev_accuracy = 0;
    std::size_t augmentations = 0;   // augmented samples trained on this epoch

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;      // 0: the initial parameters
    double best_dev_accuracy = 0;
};

/// Mini-batch AdamW over `train` plus `augmentations`. After every epoch the
/// model is scored on `dev` and the best epoch (ties to the earlier one) is
/// restored at the end; with an empty dev set the last epoch is kept. From
/// epoch 2 on, augmentations the current model disagrees with are skipped
/// when cfg.model_judge is set.
TrainResult train(Model& model, const LabeledCorpus& train, const LabeledCorpus& dev, const TrainConfig& cfg,
                  const std::vector<AugmentedSample>& augmentations = {});

// Same loop over precomputed embeddings (contextual models).
TrainResult train_contextual(Model& model, const std::vector<ContextualRecord>& train,
                             const std::vector<ContextualRecord>& dev, const TrainConfig& cfg);

// Predicted labels, in order.
std::vector<std::size_t> predict_all(const Model& model, const LabeledCorpus& corpus);

/// Confusion-based scores plus per-sample latency, parameter count and mean FLOPs.
EvalReport evaluate(const Model& model, const LabeledCorpus& corpus);
EvalReport evaluate_contextual(const Model& model, const std::vector<ContextualRecord>& records);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

struct ExperimentResult {
    Model model;
    TrainResult training;
    EvalReport test;
    AugmentReport augmentation;
    std::size_t train_size = 0, dev_size = 0, test_size = 0;
};

/// split → augmentation of the train split (when cfg.use_sea) → vocabulary
/// from the prepared train and augmented texts → train → test evaluation.
/// `provider` defaults to the built-in synonym provider.
ExperimentResult run_experiment(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                const LabeledCorpus& corpus, const ParaphraseProvider* provider = nullptr);

} // namespace mrfe

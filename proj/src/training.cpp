#include "mrfe/training.hpp"

#include "mrfe/config.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/profile.hpp"
#include "mrfe/random.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

namespace mrfe::inline MRFE_PRECISION {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (vocab_size <= kNumSpecials) throw ConfigError("vocab_size must exceed the special tokens");
    if (!(lr > 0)) throw ConfigError("lr must be positive");
    if (!(train_ratio > 0 && dev_ratio > 0 && test_ratio > 0)) throw ConfigError("split ratios must be positive");
    if (std::abs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
    optimizer().validate();
}

AdamWConfig TrainConfig::optimizer() const {
    AdamWConfig o;
    o.lr = lr;
    o.beta1 = beta1;
    o.beta2 = beta2;
    o.eps = eps;
    o.weight_decay = weight_decay;
    return o;
}

const std::vector<std::string>& TrainConfig::keys() {
    static const std::vector<std::string> k{"epochs",      "batch_size", "lr",        "weight_decay", "beta1",
                                            "beta2",       "eps",        "seed",      "train_ratio",  "dev_ratio",
                                            "test_ratio",  "sea_k",      "vocab_size", "model_judge"};
    return k;
}

std::map<std::string, std::string> TrainConfig::to_kv() const {
    return {
        {"epochs", std::to_string(epochs)},
        {"batch_size", std::to_string(batch_size)},
        {"lr", format_double(lr)},
        {"weight_decay", format_double(weight_decay)},
        {"beta1", format_double(beta1)},
        {"beta2", format_double(beta2)},
        {"eps", format_double(eps)},
        {"seed", std::to_string(seed)},
        {"train_ratio", format_double(train_ratio)},
        {"dev_ratio", format_double(dev_ratio)},
        {"test_ratio", format_double(test_ratio)},
        {"sea_k", std::to_string(sea_k)},
        {"vocab_size", std::to_string(vocab_size)},
        {"model_judge", model_judge ? "true" : "false"},
    };
}

bool TrainConfig::apply(const std::string& key, const std::string& value) {
    if (key == "epochs") epochs = parse_size(key, value);
    else if (key == "batch_size") batch_size = parse_size(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "weight_decay") weight_decay = parse_double(key, value);
    else if (key == "beta1") beta1 = parse_double(key, value);
    else if (key == "beta2") beta2 = parse_double(key, value);
    else if (key == "eps") eps = parse_double(key, value);
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "train_ratio") train_ratio = parse_double(key, value);
    else if (key == "dev_ratio") dev_ratio = parse_double(key, value);
    else if (key == "test_ratio") test_ratio = parse_double(key, value);
    else if (key == "sea_k") sea_k = parse_size(key, value);
    else if (key == "vocab_size") vocab_size = parse_size(key, value);
    else if (key == "model_judge") model_judge = parse_bool(key, value);
    else return false;
    return true;
}

SplitIndices split_indices(std::size_t n, double train_ratio, double dev_ratio, double test_ratio,
                           std::uint64_t seed) {
    if (n < 10) throw InputError("split needs at least 10 samples, got " + std::to_string(n));
    if (!(train_ratio > 0 && dev_ratio > 0 && test_ratio > 0) ||
        std::abs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be positive and sum to 1");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    seeded_shuffle(order, rng);
    const auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * dev_ratio + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_ratio + 1e-9));
    SplitIndices s;
    s.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_dev + n_test));
    s.dev.assign(order.end() - static_cast<std::ptrdiff_t>(n_dev + n_test),
                 order.end() - static_cast<std::ptrdiff_t>(n_test));
    s.test.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
    return s;
}

Split split(const LabeledCorpus& corpus, double train_ratio, double dev_ratio, double test_ratio,
            std::uint64_t seed) {
    const auto idx = split_indices(corpus.size(), train_ratio, dev_ratio, test_ratio, seed);
    auto take = [&](const std::vector<std::size_t>& ids) {
        LabeledCorpus part;
        part.label_names = corpus.label_names;
        part.domain = corpus.domain;
        for (auto i : ids) part.samples.push_back(corpus.samples[i]);
        return part;
    };
    return {take(idx.train), take(idx.dev), take(idx.test)};
}

Split split(const LabeledCorpus& corpus, const TrainConfig& cfg) {
    return split(corpus, cfg.train_ratio, cfg.dev_ratio, cfg.test_ratio, cfg.seed);
}

namespace {

struct Example {
    TokenSequence seq;
    Tensor embedding;   // defined for contextual examples
    std::size_t label = 0;
};

Example encode_example(const Model& model, const std::string& text, std::size_t label) {
    return {model.encode(text), Tensor{}, label};
}

Example contextual_example(const ContextualRecord& r, std::size_t classes) {
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= classes) {
        throw LabelError("contextual record label " + std::to_string(r.label) + " outside " +
                         std::to_string(classes) + " classes");
    }
    Example ex;
    ex.embedding = r.embedding.values.detach();
    ex.seq.tokens.assign(r.embedding.length(), std::string{});
    ex.label = static_cast<std::size_t>(r.label);
    return ex;
}

ForwardTrace run(const Model& model, const Example& ex, bool train, std::mt19937_64* rng) {
    if (ex.embedding.defined()) return model.forward_embedded(ex.embedding, ex.seq.tokens, train, rng);
    return model.forward(ex.seq, train, rng);
}

std::size_t predict_label(const Model& model, const Example& ex) {
    NoGradGuard guard;
    return run(model, ex, false, nullptr).prediction.label;
}

double accuracy_of(const Model& model, const std::vector<Example>& examples) {
    if (examples.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto& ex : examples) hit += predict_label(model, ex) == ex.label ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(examples.size());
}

void check_labels(const Model& model, const std::vector<Example>& examples) {
    for (const auto& ex : examples) {
        if (ex.label >= model.config().classes) {
            throw LabelError("label " + std::to_string(ex.label) + " outside " +
                             std::to_string(model.config().classes) + " classes");
        }
    }
}

TrainResult train_examples(Model& model, const std::vector<Example>& originals, const std::vector<Example>& extra,
                           const std::vector<Example>& dev, const TrainConfig& cfg) {
    cfg.validate();
    check_labels(model, originals);
    check_labels(model, extra);
    check_labels(model, dev);

    auto& store = model.params();
    const auto opt = cfg.optimizer();
    AdamWState state;
    std::mt19937_64 order_rng(cfg.seed);
    std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainResult result;
    std::optional<ParameterStore> best;
    double best_acc = -1.0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<const Example*> items;
        items.reserve(originals.size() + extra.size());
        for (const auto& ex : originals) items.push_back(&ex);
        std::size_t used_extra = 0;
        for (const auto& ex : extra) {
            if (epoch > 1 && cfg.model_judge && predict_label(model, ex) != ex.label) continue;
            items.push_back(&ex);
            ++used_extra;
        }
        seeded_shuffle(items, order_rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < items.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(items.size(), start + cfg.batch_size);
            const auto inv = static_cast<Scalar>(1.0 / static_cast<double>(end - start));
            store.zero_grad();
            for (std::size_t i = start; i < end; ++i) {
                const auto trace = run(model, *items[i], true, &dropout_rng);
                const Tensor l = loss(trace.prediction, items[i]->label);
                loss_sum += static_cast<double>(l.item());
                scale(l, inv).backward();
            }
            adamw_step(store, state, opt);
        }
        store.zero_grad();

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = items.empty() ? 0.0 : loss_sum / static_cast<double>(items.size());
        rec.dev_accuracy = accuracy_of(model, dev);
        rec.augmentations = used_extra;
        result.history.push_back(rec);

        if (dev.empty() || rec.dev_accuracy > best_acc) {
            best_acc = rec.dev_accuracy;
            result.best_epoch = epoch;
            result.best_dev_accuracy = rec.dev_accuracy;
            best = store.clone();
        }
    }
    if (best) {
        model.load_values(*best);
    } else {
        result.best_dev_accuracy = accuracy_of(model, dev);
    }
    return result;
}

EvalReport evaluate_examples(const Model& model, const std::vector<Example>& examples) {
    check_labels(model, examples);
    ConfusionMatrix cm(model.config().classes);
    double flops = 0;
    double ms = 0;
    for (const auto& ex : examples) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto label = predict_label(model, ex);
        const auto t1 = std::chrono::steady_clock::now();
        ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        cm.add(ex.label, label);
        const std::size_t n = ex.embedding.defined() ? ex.embedding.dim(0) : ex.seq.size();
        flops += static_cast<double>(total_flops(forward_flops(model.config(), n, model.emotion_labels().size())));
    }
    auto report = make_report(cm);
    report.parameters = model.params().parameter_count();
    if (!examples.empty()) {
        report.latency_ms = ms / static_cast<double>(examples.size());
        report.flops = flops / static_cast<double>(examples.size());
    }
    return report;
}

std::vector<Example> encode_corpus(const Model& model, const LabeledCorpus& corpus) {
    std::vector<Example> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus.samples) out.push_back(encode_example(model, s.text, s.label));
    return out;
}

std::vector<Example> contextual_examples(const Model& model, const std::vector<ContextualRecord>& records) {
    std::vector<Example> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(contextual_example(r, model.config().classes));
    return out;
}

} // namespace

TrainResult train(Model& model, const LabeledCorpus& train, const LabeledCorpus& dev, const TrainConfig& cfg,
                  const std::vector<AugmentedSample>& augmentations) {
    std::vector<Example> extra;
    extra.reserve(augmentations.size());
    for (const auto& a : augmentations) extra.push_back(encode_example(model, a.text, a.label));
    return train_examples(model, encode_corpus(model, train), extra, encode_corpus(model, dev), cfg);
}

TrainResult train_contextual(Model& model, const std::vector<ContextualRecord>& train,
                             const std::vector<ContextualRecord>& dev, const TrainConfig& cfg) {
    if (!model.config().contextual) throw ConfigError("train_contextual needs a contextual model");
    return train_examples(model, contextual_examples(model, train), {}, contextual_examples(model, dev), cfg);
}

std::vector<std::size_t> predict_all(const Model& model, const LabeledCorpus& corpus) {
    std::vector<std::size_t> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus.samples) out.push_back(model.predict(s.text).label);
    return out;
}

EvalReport evaluate(const Model& model, const LabeledCorpus& corpus) {
    return evaluate_examples(model, encode_corpus(model, corpus));
}

EvalReport evaluate_contextual(const Model& model, const std::vector<ContextualRecord>& records) {
    return evaluate_examples(model, contextual_examples(model, records));
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,loss,dev_acc\n";
    for (const auto& r : history) out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.dev_accuracy) << '\n';
}

ExperimentResult run_experiment(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                const LabeledCorpus& corpus, const ParaphraseProvider* provider) {
    train_cfg.validate();
    corpus.validate();
    ModelConfig cfg = model_cfg;
    cfg.classes = corpus.num_classes();
    if (cfg.domain.empty()) cfg.domain = corpus.domain;
    cfg.validate();
    if (cfg.contextual) throw ConfigError("run_experiment works on texts; contextual models use train_contextual");

    const auto parts = split(corpus, train_cfg);
    AugmentReport aug_report;
    std::vector<AugmentedSample> added;
    if (cfg.use_sea && train_cfg.sea_k > 0) {
        const SynonymProvider synonyms;
        const ParaphraseProvider& p = provider ? *provider : synonyms;
        const auto judge = KeywordPolarityJudge::fit(parts.train);
        auto aug = augment_corpus(parts.train, p, static_cast<unsigned>(train_cfg.sea_k),
                                  [&judge](const std::string& t) { return judge(t); }, train_cfg.seed);
        aug_report = aug.report;
        added = std::move(aug.added);
    }

    const auto templates = TemplateRegistry::builtin();
    std::vector<std::string> texts;
    for (const auto& s : parts.train.samples) texts.push_back(prepare_text(cfg, templates, s.text));
    for (const auto& a : added) texts.push_back(prepare_text(cfg, templates, a.text));

    Model model(cfg, build_vocab(texts, train_cfg.vocab_size), train_cfg.seed);
    auto training = train(model, parts.train, parts.dev, train_cfg, added);
    auto test = evaluate(model, parts.test);
    return ExperimentResult{std::move(model), std::move(training), std::move(test), std::move(aug_report),
                            parts.train.size(), parts.dev.size(), parts.test.size()};
}

} // namespace mrfe

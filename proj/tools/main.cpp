#include "gradcheck_cmd.hpp"

#include "mrfe/augmentation.hpp"
#include "mrfe/csv.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/experiments.hpp"
#include "mrfe/instruction.hpp"
#include "mrfe/profile.hpp"
#include "mrfe/run_config.hpp"
#include "mrfe/text_util.hpp"
#include "mrfe/training.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace mrfe;

namespace {

// Flags shared by the run-config driven subcommands; each maps to one config key.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> values;
    std::string config_file;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "key=value run configuration file")->check(CLI::ExistingFile);
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [&o, key](const std::string& v) { o.values.emplace_back(key, v); }, help);
    };
    flag("--out", "out", "output directory");
    flag("--seed", "seed", "random seed");
    flag("--epochs", "epochs", "training epochs");
    flag("--batch-size", "batch_size", "mini-batch size");
    flag("--lr", "lr", "learning rate");
    flag("--weight-decay", "weight_decay", "decoupled weight decay");
    flag("--kernels", "kernels", "SADE kernel sizes, e.g. 1,3,5,7");
    flag("--variant", "variant", "cisea_mrfe, ci_mrfe, cisea_sade or cisea_eece");
    flag("--fusion", "fusion", "sequential, attention_stack or summation");
    flag("--local-encoder", "local_encoder", "sade or conv");
    flag("--head-input", "head_input", "max_pool or context");
    flag("--max-len", "max_len", "maximum tokens per input");
    flag("--embed-dim", "embed_dim", "embedding width d");
    flag("--channels", "channels", "SADE output channels c");
    flag("--hidden", "hidden", "BiLSTM hidden size per direction");
    flag("--dropout", "dropout", "dropout rate");
    flag("--sea-k", "sea_k", "augmentations kept per training sample");
    flag("--ci", "use_ci", "contextual instruction on/off");
    flag("--sea", "use_sea", "semantic augmentation on/off");
    flag("--gate", "gate_on", "emotion gate on/off");
    flag("--domain", "domain", "instruction domain");
    flag("--template", "template_id", "instruction template id");
    flag("--data", "data", "CSV corpus (default: synthetic corpus)");
    flag("--text-column", "text_column", "CSV text column");
    flag("--label-column", "label_column", "CSV label column");
    flag("--labels", "labels", "label preset or comma-separated class names");
    flag("--embeddings", "embeddings", "contextual embedding file");
    flag("--paraphrases", "paraphrases", "paraphrase exchange CSV");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) cfg.apply_file(o.config_file);
    for (const auto& [k, v] : o.values) {
        try {
            cfg.apply(k, v);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("flag for '") + k + "': " + e.what());
        }
    }
    return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path out = cfg.out;
    fs::create_directories(out);
    std::ofstream f(out / "run.cfg");
    write_kv(f, cfg.to_kv());
    return out;
}

std::string pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100 * v;
    return s.str();
}

void write_report(std::ostream& out, const EvalReport& r, const std::vector<std::string>& labels) {
    out << "accuracy " << pct(r.accuracy) << "%\n";
    out << "macro_f1 " << pct(r.macro_f1) << "%\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& s = r.per_class[c];
        out << "class " << (c < labels.size() ? labels[c] : std::to_string(c)) << " precision " << pct(s.precision)
            << "% recall " << pct(s.recall) << "% f1 " << pct(s.f1) << "% support " << s.support << '\n';
    }
    out << "confusion (rows truth, columns predicted)\n";
    for (const auto& row : r.confusion.counts()) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "  ") << row[j];
        out << '\n';
    }
    out << "parameters " << r.parameters << "\n";
    out << "flops_per_sample " << std::fixed << std::setprecision(0) << r.flops << "\n";
    out << "latency_ms_per_sample " << std::setprecision(4) << r.latency_ms << '\n' << std::defaultfloat;
}

std::unique_ptr<ParaphraseProvider> make_provider(const RunConfig& cfg) {
    if (cfg.paraphrases.empty()) return std::make_unique<SynonymProvider>();
    return std::make_unique<OfflineParaphraseProvider>(OfflineParaphraseProvider::load(cfg.paraphrases));
}

void save_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    f << text;
}

int cmd_train(const RunConfig& cfg) {
    const auto out = prepare_out(cfg);
    if (!cfg.embeddings.empty()) {
        auto mc = cfg.model;
        mc.contextual = true;
        mc.use_sea = false;
        if (mc.variant == Variant::cisea_mrfe) mc.variant = Variant::ci_mrfe;
        const auto records = load_contextual(cfg.embeddings);
        if (records.empty()) throw InputError(cfg.embeddings + " holds no records");
        mc.embed_dim = records.front().embedding.width();
        const auto idx = split_indices(records.size(), cfg.train.train_ratio, cfg.train.dev_ratio,
                                       cfg.train.test_ratio, cfg.train.seed);
        auto take = [&](const std::vector<std::size_t>& ids) {
            std::vector<ContextualRecord> part;
            for (auto i : ids) part.push_back(records[i]);
            return part;
        };
        Model model(mc, Vocab{}, cfg.train.seed);
        const auto result = train_contextual(model, take(idx.train), take(idx.dev), cfg.train);
        const auto report = evaluate_contextual(model, take(idx.test));
        model.save(out / "model");
        std::ofstream h(out / "history.csv");
        write_history_csv(h, result.history);
        std::ostringstream text;
        write_report(text, report, {});
        save_text(out / "report.txt", text.str());
        std::cout << text.str();
        return 0;
    }
    const auto corpus = cfg.load_corpus();
    const auto provider = make_provider(cfg);
    auto r = run_experiment(cfg.model, cfg.train, corpus, provider.get());
    r.model.save(out / "model");
    {
        std::ofstream h(out / "history.csv");
        write_history_csv(h, r.training.history);
    }
    std::ostringstream text;
    text << "train " << r.train_size << " dev " << r.dev_size << " test " << r.test_size << '\n';
    text << "augmentations retained " << r.augmentation.retained << " of " << r.augmentation.considered << '\n';
    text << "best epoch " << r.training.best_epoch << " dev accuracy " << pct(r.training.best_dev_accuracy) << "%\n";
    write_report(text, r.test, corpus.label_names);
    save_text(out / "report.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& model_dir) {
    const auto out = prepare_out(cfg);
    const auto model = Model::load(model_dir);
    EvalReport report;
    std::vector<std::string> labels;
    if (!cfg.embeddings.empty()) {
        report = evaluate_contextual(model, load_contextual(cfg.embeddings));
    } else {
        auto corpus = cfg.load_corpus();
        labels = corpus.label_names;
        // The synthetic corpus is evaluated on its held-out test split.
        const auto data = cfg.data.empty() ? split(corpus, cfg.train).test : corpus;
        report = evaluate(model, data);
        std::ofstream p(out / "predictions.csv");
        csv::write_row(p, {"text", "label", "predicted"});
        const auto pred = predict_all(model, data);
        for (std::size_t i = 0; i < data.size(); ++i) {
            csv::write_row(p, {data.samples[i].text, labels[data.samples[i].label], labels[pred[i]]});
        }
    }
    std::ostringstream text;
    write_report(text, report, labels);
    save_text(out / "evaluation.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_augment(const RunConfig& cfg) {
    const auto out = prepare_out(cfg);
    const auto corpus = cfg.load_corpus();
    const auto provider = make_provider(cfg);
    const auto judge = KeywordPolarityJudge::fit(corpus);
    const auto result = augment_corpus(corpus, *provider, static_cast<unsigned>(cfg.train.sea_k),
                                       [&judge](const std::string& t) { return judge(t); }, cfg.train.seed);
    std::vector<ExchangeRow> rows;
    for (const auto& a : result.added) rows.push_back({a.source, a.text, corpus.label_names[a.label], a.provider});
    std::ofstream f(out / "augmented.csv");
    write_exchange_csv(f, rows);
    save_csv(out / "augmented_corpus.csv", result.corpus);
    std::ostringstream text;
    text << "sources " << corpus.size() << '\n';
    text << "considered " << result.report.considered << " retained " << result.report.retained << " retention "
         << pct(result.report.retention_rate()) << "%\n";
    for (std::size_t c = 0; c < corpus.num_classes(); ++c) {
        text << "class " << corpus.label_names[c] << " proposed " << result.report.proposed_per_class[c]
             << " retained " << result.report.retained_per_class[c] << '\n';
    }
    save_text(out / "augment.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_ablate(const RunConfig& cfg, bool save_checkpoints) {
    const auto out = prepare_out(cfg);
    const auto corpus = cfg.load_corpus();
    RunOptions opts;
    if (save_checkpoints) opts.checkpoint_dir = out / "ablation";
    opts.on_row = [](const ResultRow& r) {
        std::cerr << "finished " << r.name << ": accuracy " << pct(r.test.accuracy) << "%\n";
    };
    const auto rows = run_ablation(cfg.model, cfg.train, corpus, opts);
    std::ofstream c(out / "ablation.csv");
    write_results_csv(c, rows);
    std::ostringstream text;
    write_results_table(text, rows, "Variant");
    save_text(out / "ablation.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis_name, std::vector<std::string> values,
              const std::string& values_file) {
    const auto axis = parse_sweep_axis(axis_name);
    if (!values_file.empty()) {
        std::ifstream in(values_file);
        if (!in) throw InputError("cannot read " + values_file);
        for (std::string line; std::getline(in, line);) {
            auto t = trim(line);
            if (!t.empty() && t[0] != '#') values.push_back(t);
        }
    }
    if (values.empty()) values = default_sweep_values(axis);
    const auto out = prepare_out(cfg);
    const auto corpus = cfg.load_corpus();
    RunOptions opts;
    opts.on_row = [](const ResultRow& r) {
        std::cerr << "finished " << r.name << ": accuracy " << pct(r.test.accuracy) << "%\n";
    };
    const auto rows = sweep(axis, values, cfg.model, cfg.train, corpus, opts);
    {
        std::ofstream c(out / "sweep.csv");
        write_results_csv(c, rows);
        std::ofstream p(out / "sweep_plot.csv");
        write_plot_csv(p, axis, rows);
    }
    std::ostringstream text;
    write_results_table(text, rows, to_string(axis));
    save_text(out / "sweep.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& model_dir, std::size_t reps) {
    const auto out = prepare_out(cfg);
    const auto corpus = cfg.load_corpus();
    const auto test = split(corpus, cfg.train).test;
    std::optional<Model> model;
    if (!model_dir.empty()) {
        model.emplace(Model::load(model_dir));
    } else {
        // Latency and size do not depend on trained values.
        auto mc = cfg.model;
        mc.classes = corpus.num_classes();
        const auto templates = TemplateRegistry::builtin();
        std::vector<std::string> texts;
        for (const auto& s : split(corpus, cfg.train).train.samples) texts.push_back(prepare_text(mc, templates, s.text));
        model.emplace(mc, build_vocab(texts, cfg.train.vocab_size), cfg.train.seed);
    }
    const auto p = profile(*model, test, reps);
    std::ostringstream text;
    text << "parameters " << p.parameters << '\n';
    text << "flops_per_sample " << std::fixed << std::setprecision(0) << p.flops << '\n';
    text << std::setprecision(4) << "latency_ms " << p.latency_mean_ms << " ± " << p.latency_std_ms << " over "
         << p.repetitions << " runs\n";
    save_text(out / "bench.txt", text.str());
    std::ofstream c(out / "bench.csv");
    csv::write_row(c, {"parameters", "flops", "latency_mean_ms", "latency_std_ms", "repetitions"});
    csv::write_row(c, {std::to_string(p.parameters), format_double(p.flops), format_double(p.latency_mean_ms),
                       format_double(p.latency_std_ms), std::to_string(p.repetitions)});
    std::cout << text.str();
    return 0;
}

struct InstructArgs {
    std::string text = "The restaurant was fantastic.";
    std::string context, response = "The review is positive", identifier = "fantastic";
    std::string domain, template_id = "plain", templates_file, out;
    bool bare = false;
};

int cmd_instruct(const InstructArgs& a) {
    auto registry = TemplateRegistry::builtin();
    if (!a.templates_file.empty()) {
        for (auto& t : load_templates(a.templates_file)) registry.add(std::move(t));
    }
    InstructionTemplate tmpl;
    if (!a.domain.empty()) {
        const auto m = registry.by_domain(a.domain);
        if (m.empty()) throw RegistryError("no template for domain '" + a.domain + "'");
        tmpl = *m.front();
    } else {
        tmpl = registry.by_id(a.template_id);
    }
    auto opt = [&](const std::string& s) { return (a.bare || s.empty()) ? std::optional<std::string>{} : std::optional(s); };
    const auto rendered = apply_instruction(a.text, a.context.empty() ? std::nullopt : std::optional(a.context), tmpl,
                                            opt(a.response), opt(a.identifier));
    std::cout << rendered << '\n';
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        save_text(fs::path(a.out) / "instruction.txt", rendered + "\n");
    }
    return 0;
}

int cmd_export_synthetic(const RunConfig& cfg) {
    const auto out = prepare_out(cfg);
    const auto corpus = make_synthetic_corpus(cfg.synthetic_per_class, cfg.synthetic_classes, cfg.train.seed);
    save_csv(out / "synthetic.csv", corpus);
    std::size_t negated = 0;
    for (const auto& s : corpus.samples) negated += is_negated_synthetic(s) ? 1 : 0;
    std::cout << "wrote " << corpus.size() << " samples (" << negated << " negated) to "
              << (out / "synthetic.csv").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sentiment classifier with instruction context, augmentation and multi-scale emotion encoding"};
    app.require_subcommand(1);

    Overrides train_o, eval_o, aug_o, ablate_o, sweep_o, bench_o, synth_o;
    auto* train = app.add_subcommand("train", "train and test one model");
    add_run_flags(train, train_o);

    std::string model_dir;
    auto* evaluate = app.add_subcommand("evaluate", "score a saved model");
    add_run_flags(evaluate, eval_o);
    evaluate->add_option("--model", model_dir, "model directory written by train")->required()->check(CLI::ExistingDirectory);

    auto* augment = app.add_subcommand("augment", "write augmentation candidates that pass the filter");
    add_run_flags(augment, aug_o);

    InstructArgs ia;
    auto* instruct = app.add_subcommand("instruct", "render an instruction template");
    instruct->add_option("--text", ia.text, "review text");
    instruct->add_option("--context", ia.context, "optional context sentence");
    instruct->add_option("--response", ia.response, "comment response");
    instruct->add_option("--identifier", ia.identifier, "sentiment identifier word");
    instruct->add_flag("--bare", ia.bare, "omit the comment");
    instruct->add_option("--domain", ia.domain, "use the first template of this domain");
    instruct->add_option("--template", ia.template_id, "template id");
    instruct->add_option("--templates", ia.templates_file, "extra template file")->check(CLI::ExistingFile);
    instruct->add_option("--out", ia.out, "output directory");

    bool checkpoints = false;
    auto* ablate = app.add_subcommand("ablate", "train the ablation grid");
    add_run_flags(ablate, ablate_o);
    ablate->add_flag("--save-checkpoints", checkpoints, "save each row's model under OUT/ablation");

    std::string axis = "kernels", values_file;
    std::vector<std::string> values;
    auto* sweep_cmd = app.add_subcommand("sweep", "train one model per value of an axis");
    add_run_flags(sweep_cmd, sweep_o);
    sweep_cmd->add_option("--axis", axis, "kernels, max_len or fusion");
    sweep_cmd->add_option("--value", values, "axis value (repeatable)");
    sweep_cmd->add_option("--values-file", values_file, "one axis value per line")->check(CLI::ExistingFile);

    std::size_t reps = 100;
    std::string bench_model;
    auto* bench = app.add_subcommand("bench", "parameters, FLOPs and latency");
    add_run_flags(bench, bench_o);
    bench->add_option("--model", bench_model, "model directory (default: untrained model)")->check(CLI::ExistingDirectory);
    bench->add_option("--repetitions", reps, "timed forward passes")->check(CLI::PositiveNumber);

    std::uint64_t gc_seed = 1;
    double gc_tol = 1e-3;
    std::string gc_out = "mrfe_out";
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks in double precision");
    gradcheck->add_option("--seed", gc_seed, "parameter seed");
    gradcheck->add_option("--tolerance", gc_tol, "maximum relative error");
    gradcheck->add_option("--out", gc_out, "output directory");

    auto* synth = app.add_subcommand("export-synthetic", "write the synthetic corpus as CSV");
    add_run_flags(synth, synth_o);
    synth->add_option_function<std::string>(
        "--per-class", [&](const std::string& v) { synth_o.values.emplace_back("synthetic_per_class", v); },
        "samples per class");
    synth->add_option_function<std::string>(
        "--classes", [&](const std::string& v) { synth_o.values.emplace_back("synthetic_classes", v); },
        "number of classes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*train) return cmd_train(resolve(train_o));
        if (*evaluate) return cmd_evaluate(resolve(eval_o), model_dir);
        if (*augment) return cmd_augment(resolve(aug_o));
        if (*instruct) return cmd_instruct(ia);
        if (*ablate) return cmd_ablate(resolve(ablate_o), checkpoints);
        if (*sweep_cmd) return cmd_sweep(resolve(sweep_o), axis, values, values_file);
        if (*bench) return cmd_bench(resolve(bench_o), bench_model, reps);
        if (*gradcheck) return run_gradcheck(gc_seed, gc_tol, gc_out, std::cout);
        if (*synth) return cmd_export_synthetic(resolve(synth_o));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

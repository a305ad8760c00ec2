#include "mrfe/experiments.hpp"

#include "mrfe/config.hpp"
#include "mrfe/csv.hpp"
#include "mrfe/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace mrfe::inline MRFE_PRECISION {

std::vector<GridEntry> ablation_grid(const ModelConfig& base) {
    ModelConfig full = base;
    full.variant = Variant::cisea_mrfe;
    full.use_ci = true;
    full.use_sea = true;
    full.local_encoder = LocalEncoder::sade;

    std::vector<GridEntry> grid;
    grid.push_back({"full", full});

    auto no_ci = full;
    no_ci.use_ci = false;
    grid.push_back({"w/o CI", no_ci});

    auto no_sea = full;
    no_sea.variant = Variant::ci_mrfe;
    no_sea.use_sea = false;
    grid.push_back({"w/o SEA", no_sea});

    auto no_sade = full;
    no_sade.local_encoder = LocalEncoder::conv;
    grid.push_back({"w/o SADE", no_sade});

    auto no_eece = full;
    no_eece.variant = Variant::cisea_sade;
    no_eece.fusion = Fusion::sequential;
    no_eece.head_input = HeadInput::max_pool;
    grid.push_back({"w/o EECE", no_eece});

    auto k3 = full;
    k3.kernels = {3};
    grid.push_back({"single-k=3", k3});

    auto k135 = full;
    k135.kernels = {1, 3, 5};
    grid.push_back({"[1,3,5]", k135});

    for (const auto& g : grid) g.config.validate();
    return grid;
}

std::string to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::kernels: return "kernels";
    case SweepAxis::max_len: return "max_len";
    case SweepAxis::fusion: return "fusion";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "kernels") return SweepAxis::kernels;
    if (s == "max_len") return SweepAxis::max_len;
    if (s == "fusion") return SweepAxis::fusion;
    throw ConfigError("unknown sweep axis '" + s + "' (kernels, max_len, fusion)");
}

std::vector<std::string> default_sweep_values(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::kernels: return {"1,3,5", "1,3,7", "3,5,7", "3", "5", "1,3,5,7"};
    case SweepAxis::max_len: return {"32", "64", "128", "256", "512"};
    case SweepAxis::fusion: return {"sequential", "attention_stack", "summation"};
    }
    return {};
}

std::vector<GridEntry> sweep_grid(SweepAxis axis, const std::vector<std::string>& values, const ModelConfig& base) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<GridEntry> grid;
    for (const auto& v : values) {
        ModelConfig cfg = base;
        switch (axis) {
        case SweepAxis::kernels: cfg.kernels = parse_kernel_list(v); break;
        case SweepAxis::max_len: cfg.max_len = parse_size("max_len", v); break;
        case SweepAxis::fusion: cfg.fusion = parse_fusion(v); break;
        }
        cfg.validate();
        grid.push_back({v, cfg});
    }
    return grid;
}

std::size_t worker_threads() {
    if (const char* env = std::getenv("MRFE_NUM_THREADS"); env != nullptr && *env != '\0') {
        try {
            const auto n = parse_size("MRFE_NUM_THREADS", env);
            if (n > 0) return n;
        } catch (const ConfigError&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ResultRow> run_grid(const std::vector<GridEntry>& grid, const TrainConfig& train_cfg,
                                const LabeledCorpus& corpus, const RunOptions& options) {
    train_cfg.validate();
    std::vector<std::optional<ResultRow>> rows(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                auto r = run_experiment(grid[i].config, train_cfg, corpus);
                ResultRow row{grid[i].name, r.model.config(), r.test, r.training, r.augmentation, std::nullopt};
                if (options.checkpoint_dir) {
                    char dir[16];
                    std::snprintf(dir, sizeof dir, "row%02zu", i + 1);
                    row.checkpoint = *options.checkpoint_dir / dir;
                    r.model.save(*row.checkpoint);
                }
                if (options.on_row) {
                    std::lock_guard lock(report_mutex);
                    options.on_row(row);
                }
                rows[i] = std::move(row);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t threads = std::min(grid.size(), options.threads ? options.threads : worker_threads());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<ResultRow> out;
    for (auto& r : rows) out.push_back(std::move(*r));
    return out;
}

std::vector<ResultRow> run_ablation(const ModelConfig& base, const TrainConfig& train_cfg,
                                    const LabeledCorpus& corpus, const RunOptions& options) {
    return run_grid(ablation_grid(base), train_cfg, corpus, options);
}

std::vector<ResultRow> sweep(SweepAxis axis, const std::vector<std::string>& values, const ModelConfig& base,
                             const TrainConfig& train_cfg, const LabeledCorpus& corpus, const RunOptions& options) {
    return run_grid(sweep_grid(axis, values, base), train_cfg, corpus, options);
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    csv::write_row(out, {"name", "accuracy", "macro_f1", "parameters", "flops", "latency_ms", "best_epoch"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.name, format_double(r.test.accuracy), format_double(r.test.macro_f1),
                             std::to_string(r.test.parameters), format_double(r.test.flops),
                             format_double(r.test.latency_ms), std::to_string(r.training.best_epoch)});
    }
}

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

} // namespace

void write_results_table(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& first_column) {
    const std::vector<std::string> header{first_column, "Acc (%)", "F1 (%)", "Params", "FLOPs", "ms/sample"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        cells.push_back({r.name, fixed(100 * r.test.accuracy, 2), fixed(100 * r.test.macro_f1, 2),
                         std::to_string(r.test.parameters), fixed(r.test.flops, 0), fixed(r.test.latency_ms, 3)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
            else out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
        }
        out << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : cells) line(row);
    out << std::left;
}

void write_plot_csv(std::ostream& out, SweepAxis axis, const std::vector<ResultRow>& rows) {
    csv::write_row(out, {"axis", "value", "accuracy", "macro_f1"});
    for (const auto& r : rows) {
        csv::write_row(out, {to_string(axis), r.name, format_double(r.test.accuracy), format_double(r.test.macro_f1)});
    }
}

} // namespace mrfe

#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/training.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct GridEntry {
    std::string name;
    ModelConfig config;
};

// full, w/o CI, w/o SEA, w/o SADE, w/o EECE, single-k=3, [1,3,5], all derived from `base`.
std::vector<GridEntry> ablation_grid(const ModelConfig& base);

enum class SweepAxis { kernels, max_len, fusion };
std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& s);

// Defaults: the six kernel rows, lengths 32..512, the three fusion modes.
std::vector<std::string> default_sweep_values(SweepAxis axis);
// One config per value; throws ConfigError on a value the axis cannot take.
std::vector<GridEntry> sweep_grid(SweepAxis axis, const std::vector<std::string>& values, const ModelConfig& base);

struct ResultRow {
    std::string name;
    ModelConfig config;
    EvalReport test;
    TrainResult training;
    AugmentReport augmentation;
    std::optional<std::filesystem::path> checkpoint;
};

struct RunOptions {
    std::size_t threads = 0;                            // 0: worker_threads()
    std::optional<std::filesystem::path> checkpoint_dir;   // one subdirectory per row
    std::function<void(const ResultRow&)> on_row;       // called from the finishing worker, serialized
};

// MRFE_NUM_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t worker_threads();

// Runs every entry through run_experiment with the same TrainConfig, rows in grid order.
std::vector<ResultRow> run_grid(const std::vector<GridEntry>& grid, const TrainConfig& train_cfg,
                                const LabeledCorpus& corpus, const RunOptions& options = {});

std::vector<ResultRow> run_ablation(const ModelConfig& base, const TrainConfig& train_cfg,
                                    const LabeledCorpus& corpus, const RunOptions& options = {});
std::vector<ResultRow> sweep(SweepAxis axis, const std::vector<std::string>& values, const ModelConfig& base,
                             const TrainConfig& train_cfg, const LabeledCorpus& corpus,
                             const RunOptions& options = {});

// name,accuracy,macro_f1,parameters,flops,latency_ms,best_epoch
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
// Column-aligned plain text with accuracy and macro-F1 as percentages.
void write_results_table(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& first_column);
// axis,value,accuracy,macro_f1
void write_plot_csv(std::ostream& out, SweepAxis axis, const std::vector<ResultRow>& rows);

} // namespace mrfe

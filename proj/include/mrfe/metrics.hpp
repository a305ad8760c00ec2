#pragma once

#include "mrfe/precision.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

/// counts[true][predicted].
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes = 2);
    static ConfusionMatrix from_counts(std::vector<std::vector<std::uint64_t>> counts);

    void add(std::size_t truth, std::size_t predicted);
    std::size_t classes() const noexcept { return counts_.size(); }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth).at(predicted); }
    std::uint64_t total() const;
    std::uint64_t correct() const;
    const std::vector<std::vector<std::uint64_t>>& counts() const noexcept { return counts_; }

private:
    std::vector<std::vector<std::uint64_t>> counts_;
};

struct ClassScores {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::uint64_t support = 0;
};

// trace / total; 0 for an empty matrix.
double accuracy(const ConfusionMatrix& cm);
// A zero denominator gives 0 for that ratio.
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);
// Unweighted mean of per-class F1.
double macro_f1(const ConfusionMatrix& cm);

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy = 0;
    double macro_f1 = 0;
    std::vector<ClassScores> per_class;
    double latency_ms = 0;         // wall-clock per sample
    std::size_t parameters = 0;
    double flops = 0;              // mean analytic forward FLOPs per sample
};

EvalReport make_report(const ConfusionMatrix& cm);

struct WelchResult {
    double t = 0;
    double df = 0;
    double p = 1;
};

/// Two-sided Welch t-test with Welch–Satterthwaite degrees of freedom.
/// Each sample needs at least two values (InputError otherwise).
WelchResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

} // namespace mrfe

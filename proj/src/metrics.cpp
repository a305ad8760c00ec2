#include "mrfe/metrics.hpp"

#include "mrfe/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>

namespace mrfe::inline MRFE_PRECISION {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : counts_(classes, std::vector<std::uint64_t>(classes, 0)) {
    if (classes == 0) throw ConfigError("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_counts(std::vector<std::vector<std::uint64_t>> counts) {
    ConfusionMatrix cm(counts.size());
    for (const auto& row : counts) {
        if (row.size() != counts.size()) throw DimensionError("confusion matrix must be square");
    }
    cm.counts_ = std::move(counts);
    return cm;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
    if (truth >= classes() || predicted >= classes()) {
        throw LabelError("confusion entry (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                         ") outside " + std::to_string(classes()) + " classes");
    }
    ++counts_[truth][predicted];
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts_)
        for (auto v : row) n += v;
    return n;
}

std::uint64_t ConfusionMatrix::correct() const {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) n += counts_[i][i];
    return n;
}

double accuracy(const ConfusionMatrix& cm) {
    const auto n = cm.total();
    return n == 0 ? 0.0 : static_cast<double>(cm.correct()) / static_cast<double>(n);
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
    const std::size_t c = cm.classes();
    std::vector<ClassScores> out(c);
    for (std::size_t k = 0; k < c; ++k) {
        std::uint64_t tp = cm.at(k, k), predicted = 0, actual = 0;
        for (std::size_t j = 0; j < c; ++j) {
            predicted += cm.at(j, k);
            actual += cm.at(k, j);
        }
        auto& s = out[k];
        s.support = actual;
        s.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        s.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
        s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    return out;
}

double macro_f1(const ConfusionMatrix& cm) {
    const auto scores = per_class_scores(cm);
    double sum = 0;
    for (const auto& s : scores) sum += s.f1;
    return sum / static_cast<double>(scores.size());
}

EvalReport make_report(const ConfusionMatrix& cm) {
    EvalReport r;
    r.confusion = cm;
    r.accuracy = accuracy(cm);
    r.per_class = per_class_scores(cm);
    r.macro_f1 = macro_f1(cm);
    return r;
}

WelchResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw InputError("Welch t-test needs at least two values per sample");
    auto moments = [](const std::vector<double>& x) {
        double mean = 0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        double ss = 0;
        for (double v : x) ss += (v - mean) * (v - mean);
        return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;
    const double se2 = sa + sb;
    const double diff = ma - mb;
    WelchResult r;
    if (se2 == 0.0) {
        r.df = na + nb - 2.0;
        if (diff == 0.0) return r;
        r.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    boost::math::students_t dist(r.df);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    return r;
}

} // namespace mrfe

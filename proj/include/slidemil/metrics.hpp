#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "slidemil/common.hpp"

namespace slidemil {

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
    std::vector<double> thresholds;                 // one per interior point
};

struct RocResult {
    RocCurve curve;
    double auc = 0.0;
};

// Threshold-sweep ROC and trapezoidal AUC. Equal scores advance as one step,
// which makes the trapezoid rule agree exactly with the Mann-Whitney
// statistic under the half-credit tie convention.
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ShapeError("scores/labels length mismatch");
    std::size_t pos = 0, neg = 0;
    for (int y : labels) (y ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw DataError("roc_auc: needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocResult out;
    out.curve.points.emplace_back(0.0, 0.0);
    double auc = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? dtp : dfp) += 1;
            ++j;
        }
        const double fpr0 = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr0 = static_cast<double>(tp) / static_cast<double>(pos);
        tp += dtp;
        fp += dfp;
        const double fpr1 = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr1 = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (fpr1 - fpr0) * 0.5 * (tpr0 + tpr1);
        out.curve.points.emplace_back(fpr1, tpr1);
        out.curve.thresholds.push_back(scores[order[i]]);
        i = j;
    }
    out.auc = auc;
    return out;
}

struct RunSummary {
    std::vector<double> aucs;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1)

    // Table-style "0.971 ± 0.015" with three decimals.
    std::string formatted() const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f \xC2\xB1 %.3f", mean, stddev);
        return buf;
    }
};

inline RunSummary aggregate_runs(const std::vector<double>& aucs) {
    if (aucs.size() < 2) throw ConfigError("aggregate_runs: need at least 2 runs");
    RunSummary s;
    s.aucs = aucs;
    for (double a : aucs) s.mean += a;
    s.mean /= static_cast<double>(aucs.size());
    double ss = 0.0;
    for (double a : aucs) ss += (a - s.mean) * (a - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(aucs.size() - 1));
    return s;
}

// Index of the fold with the best validation AUC; ties favor the lower index.
inline std::size_t select_best_fold(const std::vector<double>& val_aucs) {
    if (val_aucs.size() < 2) throw ConfigError("select_best_fold: need at least 2 folds");
    std::size_t best = 0;
    for (std::size_t i = 1; i < val_aucs.size(); ++i)
        if (val_aucs[i] > val_aucs[best]) best = i;
    return best;
}

inline void write_roc_points(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ROC points: " + path);
    out << "fpr\ttpr\tthreshold\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        out << curve.points[i].first << '\t' << curve.points[i].second << '\t';
        if (i == 0)
            out << "inf";
        else
            out << curve.thresholds[i - 1];
        out << '\n';
    }
}

}  // namespace slidemil

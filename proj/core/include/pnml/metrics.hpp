#pragma once

// Detection and open-set metrics. Higher scores mean "more positive"
// (for regret-based OOD detection pass the regret with OOD as positives, or
// the negated regret with IND as positives).

#include <vector>

namespace pnml::metrics {

// Mann-Whitney statistic with average ranks: P(s⁺ > s⁻) + ½P(s⁺ = s⁻).
double auroc(const std::vector<double>& positives, const std::vector<double>& negatives);

// Threshold T = the ⌈level·n⁺⌉-th largest positive score, so that at least
// `level` of the positives satisfy s ≥ T; returns the fraction of negatives
// with s < T.
double tnr_at_tpr(const std::vector<double>& positives, const std::vector<double>& negatives,
                  double level = 0.95);

// max over thresholds T of ½(P(s⁺ ≥ T) + P(s⁻ < T)), T ranging over every
// observed score and +∞.
double detection_accuracy(const std::vector<double>& positives, const std::vector<double>& negatives);

struct ScoredSample {
    double score = 0.0;
    int label = 0;         // class index, −1 for unknown/OOD
    bool correct = false;  // closed-set prediction was right
};

struct OscrPoint {
    double threshold = 0.0;
    double fpr = 0.0;  // |{open : s ≥ T}| / |open|
    double ccr = 0.0;  // |{closed : correct, s ≥ T}| / |closed|
};

struct OscrCurve {
    std::vector<OscrPoint> points;  // starts at (0, 0) for T = +∞, thresholds descending
    double auc = 0.0;               // trapezoid over FPR

    // Largest CCR among points with FPR ≤ fpr.
    double ccr_at_fpr(double fpr) const;
};

OscrCurve oscr_curve(const std::vector<ScoredSample>& closed_set, const std::vector<ScoredSample>& open_set);

}  // namespace pnml::metrics

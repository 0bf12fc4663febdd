#include "pnml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pnml/error.hpp"

namespace pnml::metrics {

namespace {

void check(const std::vector<double>& positives, const std::vector<double>& negatives) {
    if (positives.empty() || negatives.empty()) throw InputError("positive and negative score lists must be nonempty");
    for (double s : positives) {
        if (!std::isfinite(s)) throw InputError("scores must be finite");
    }
    for (double s : negatives) {
        if (!std::isfinite(s)) throw InputError("scores must be finite");
    }
}

// |{v ∈ sorted : v ≥ t}|
std::size_t count_at_least(const std::vector<double>& sorted, double t) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

std::vector<double> sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

double auroc(const std::vector<double>& positives, const std::vector<double>& negatives) {
    check(positives, negatives);
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> all;
    all.reserve(positives.size() + negatives.size());
    for (double s : positives) all.push_back({s, true});
    for (double s : negatives) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].positive) rank_sum += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(positives.size());
    const double nn = static_cast<double>(negatives.size());
    return (rank_sum - 0.5 * np * (np + 1.0)) / (np * nn);
}

double tnr_at_tpr(const std::vector<double>& positives, const std::vector<double>& negatives, double level) {
    check(positives, negatives);
    if (!(level > 0.0 && level <= 1.0)) throw InputError("TPR level must lie in (0, 1]");
    std::vector<double> pos = positives;
    std::sort(pos.begin(), pos.end(), std::greater<>());
    const double n = static_cast<double>(pos.size());
    auto k = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
    k = std::clamp<std::size_t>(k, 1, pos.size());
    const double threshold = pos[k - 1];
    std::size_t below = 0;
    for (double s : negatives) below += s < threshold;
    return static_cast<double>(below) / static_cast<double>(negatives.size());
}

double detection_accuracy(const std::vector<double>& positives, const std::vector<double>& negatives) {
    check(positives, negatives);
    const std::vector<double> pos = sorted_copy(positives);
    const std::vector<double> neg = sorted_copy(negatives);
    std::vector<double> thresholds = pos;
    thresholds.insert(thresholds.end(), neg.begin(), neg.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    double best = 0.0;
    for (double t : thresholds) {
        const double tpr = static_cast<double>(count_at_least(pos, t)) / np;
        const double tnr = static_cast<double>(neg.size() - count_at_least(neg, t)) / nn;
        best = std::max(best, 0.5 * (tpr + tnr));
    }
    return best;
}

double OscrCurve::ccr_at_fpr(double fpr) const {
    double best = 0.0;
    for (const OscrPoint& p : points) {
        if (p.fpr <= fpr) best = std::max(best, p.ccr);
    }
    return best;
}

OscrCurve oscr_curve(const std::vector<ScoredSample>& closed_set, const std::vector<ScoredSample>& open_set) {
    if (closed_set.empty() || open_set.empty()) throw InputError("closed and open sets must be nonempty");
    std::vector<double> correct;
    std::vector<double> open;
    std::vector<double> thresholds;
    for (const ScoredSample& s : closed_set) {
        if (!std::isfinite(s.score)) throw InputError("scores must be finite");
        if (s.correct) correct.push_back(s.score);
        thresholds.push_back(s.score);
    }
    for (const ScoredSample& s : open_set) {
        if (!std::isfinite(s.score)) throw InputError("scores must be finite");
        open.push_back(s.score);
        thresholds.push_back(s.score);
    }
    std::sort(correct.begin(), correct.end());
    std::sort(open.begin(), open.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n_closed = static_cast<double>(closed_set.size());
    const double n_open = static_cast<double>(open_set.size());
    OscrCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    for (double t : thresholds) {
        curve.points.push_back({t, static_cast<double>(count_at_least(open, t)) / n_open,
                                static_cast<double>(count_at_least(correct, t)) / n_closed});
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const OscrPoint& a = curve.points[i - 1];
        const OscrPoint& b = curve.points[i];
        curve.auc += (b.fpr - a.fpr) * 0.5 * (a.ccr + b.ccr);
    }
    return curve;
}

}  // namespace pnml::metrics

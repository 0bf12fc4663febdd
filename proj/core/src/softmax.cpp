#include "pnml/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pnml/error.hpp"
#include "pnml/parallel.hpp"

namespace pnml::softmax {

namespace {

constexpr double kClip = 1e-12;

Vector softmax_row(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

void check_labels(const std::vector<int>& labels, Eigen::Index rows, int num_classes) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw InputError("label count " + std::to_string(labels.size()) + " does not match " +
                         std::to_string(rows) + " rows");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                             " is outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

}  // namespace

EmbeddingSet::EmbeddingSet(Matrix features, bool normalize, std::optional<double> rank_tolerance)
    : features_(std::move(features)), normalize_(normalize) {
    if (features_.rows() < 1 || features_.cols() < 1) throw InputError("embedding set is empty");
    linalg::require_finite(features_, "embeddings");
    if (normalize_) {
        for (Eigen::Index i = 0; i < features_.rows(); ++i) {
            const double n = features_.row(i).norm();
            if (n == 0.0) {
                throw InputError("embedding row " + std::to_string(i) + " has zero norm and cannot be normalized");
            }
            features_.row(i) /= n;
        }
    }
    spectrum_ = linalg::svd(features_, rank_tolerance);
}

Vector EmbeddingSet::prepare(const Vector& x) const {
    if (x.size() != dimension()) {
        throw InputError("embedding has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dimension()));
    }
    linalg::require_finite(x, "embedding");
    if (!normalize_) return x;
    const double n = x.norm();
    if (n == 0.0) throw InputError("test embedding has zero norm and cannot be normalized");
    return x / n;
}

double EmbeddingSet::pinv_quadratic_form(const Vector& x) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < spectrum_.rank; ++i) {
        const double a = spectrum_.feature_basis.col(i).dot(x) / spectrum_.singular_values(i);
        total += a * a;
    }
    return total;
}

GVector g_vector(const EmbeddingSet& set, const Vector& x) {
    if (x.size() != set.dimension()) {
        throw InputError("embedding has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(set.dimension()));
    }
    const auto& s = set.spectrum();
    const Vector perp = linalg::orthogonal_residual(s, x);
    const double perp_sq = perp.squaredNorm();
    GVector out;
    if (std::sqrt(perp_sq) > 1e-10 * std::max(1.0, x.norm())) {
        out.g = perp / perp_sq;
        out.xg = x.dot(out.g);
        return out;
    }
    // X⁺X⁺ᵀx = Σ u_i (u_iᵀx) / h_i²
    Vector w = Vector::Zero(x.size());
    double quad = 0.0;
    for (Eigen::Index i = 0; i < s.rank; ++i) {
        const double proj = s.feature_basis.col(i).dot(x);
        const double h2 = s.singular_values(i) * s.singular_values(i);
        w += s.feature_basis.col(i) * (proj / h2);
        quad += proj * proj / h2;
    }
    out.g = w / (1.0 + quad);
    out.xg = quad / (1.0 + quad);
    out.in_span = true;
    return out;
}

double genie_probability(double p, double a) {
    const double pc = std::clamp(p, kClip, 1.0 - kClip);
    return pc / (pc + std::exp(a * std::log(pc)) * (1.0 - pc));
}

CategoricalPredictive analytic_regret(const Vector& probabilities, double a) {
    if (probabilities.size() < 1) throw InputError("probability vector is empty");
    if (!probabilities.allFinite() || (probabilities.array() < 0.0).any()) {
        throw InputError("probability vector must be finite and nonnegative");
    }
    if (std::abs(probabilities.sum() - 1.0) > 1e-8) throw InputError("probabilities must sum to 1");
    if (!(a >= -1e-12 && a <= 1.0 + 1e-12)) {
        throw InputError("xᵀg must lie in [0, 1], got " + std::to_string(a));
    }
    const double ac = std::clamp(a, 0.0, 1.0);
    Vector genie(probabilities.size());
    for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
        genie(i) = ac == 0.0 ? probabilities(i) : genie_probability(probabilities(i), ac);
    }
    const double total = genie.sum();
    CategoricalPredictive out;
    out.probabilities = genie / total;
    out.regret = ac == 0.0 ? 0.0 : std::log(total);
    return out;
}

SoftmaxHead::SoftmaxHead(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 1 || weights_.cols() < 2) throw InputError("softmax head needs d >= 1 and C >= 2");
    linalg::require_finite(weights_, "softmax weights");
}

SoftmaxHead SoftmaxHead::zeros(Eigen::Index dimension, int num_classes) {
    return SoftmaxHead(Matrix::Zero(dimension, num_classes));
}

Vector SoftmaxHead::probabilities(const Vector& x) const {
    if (x.size() != dimension()) throw InputError("embedding dimension does not match the head");
    return softmax_row(weights_.transpose() * x);
}

Matrix SoftmaxHead::probabilities(const Matrix& x) const {
    if (x.cols() != dimension()) throw InputError("embedding dimension does not match the head");
    Matrix logits = x * weights_;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        logits.row(i) = softmax_row(logits.row(i).transpose()).transpose();
    }
    return logits;
}

double SoftmaxHead::loss(const Matrix& x, const std::vector<int>& labels) const {
    check_labels(labels, x.rows(), num_classes());
    const Matrix logits = x * weights_;
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        total += lse - logits(i, labels[i]);
    }
    return total / static_cast<double>(x.rows());
}

std::vector<double> SoftmaxHead::train(const Matrix& x, const std::vector<int>& labels,
                                       const TrainingOptions& options) {
    check_labels(labels, x.rows(), num_classes());
    if (!(options.learning_rate > 0.0) || options.epochs < 0) throw InputError("invalid training options");
    const double n = static_cast<double>(x.rows());
    std::vector<double> history;
    history.reserve(options.epochs);
    double previous = loss(x, labels);
    int rising = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        Matrix residual = probabilities(x);
        for (Eigen::Index i = 0; i < x.rows(); ++i) residual(i, labels[i]) -= 1.0;
        weights_.noalias() -= (options.learning_rate / n) * (x.transpose() * residual);
        const double current = loss(x, labels);
        history.push_back(current);
        if (!std::isfinite(current)) throw NumericalError("softmax training produced a non-finite loss");
        rising = current > previous ? rising + 1 : 0;
        if (options.divergence_patience > 0 && rising >= options.divergence_patience) {
            throw NumericalError("softmax training diverged: loss increased for " +
                                 std::to_string(rising) + " consecutive epochs (epoch " +
                                 std::to_string(epoch + 1) + ")");
        }
        previous = current;
    }
    return history;
}

SoftmaxHead fit_erm(const EmbeddingSet& set, const std::vector<int>& labels, int num_classes,
                    const TrainingOptions& options) {
    if (num_classes < 2) throw InputError("need at least 2 classes");
    SoftmaxHead head = SoftmaxHead::zeros(set.dimension(), num_classes);
    head.train(set.features(), labels, options);
    return head;
}

OodScore ood_score(const EmbeddingSet& set, const SoftmaxHead& head, const Vector& x) {
    const Vector xp = set.prepare(x);
    OodScore out;
    out.erm_probabilities = head.probabilities(xp);
    const GVector g = g_vector(set, xp);
    out.xg = g.xg;
    out.pnml = analytic_regret(out.erm_probabilities, std::clamp(g.xg, 0.0, 1.0));
    out.regret = out.pnml.regret;
    return out;
}

CategoricalPredictive trained_pnml(const EmbeddingSet& set, const std::vector<int>& labels,
                                   const SoftmaxHead& erm, const Vector& x,
                                   const FineTuneOptions& options) {
    const int c = erm.num_classes();
    check_labels(labels, set.size(), c);
    const Vector xp = set.prepare(x);
    Matrix augmented(set.size() + 1, set.dimension());
    augmented.topRows(set.size()) = set.features();
    augmented.row(set.size()) = xp.transpose();

    Vector genie(c);
    parallel_for(static_cast<std::size_t>(c), [&](std::size_t label) {
        std::vector<int> y = labels;
        y.push_back(static_cast<int>(label));
        SoftmaxHead head = erm;
        head.train(augmented, y, {options.learning_rate, options.epochs, options.divergence_patience});
        genie(static_cast<Eigen::Index>(label)) = head.probabilities(xp)(static_cast<Eigen::Index>(label));
    });
    const double total = genie.sum();
    CategoricalPredictive out;
    out.probabilities = genie / total;
    out.regret = std::log(total);
    return out;
}

CategoricalPredictive twice_universal(const std::vector<CategoricalPredictive>& learners) {
    if (learners.empty()) throw InputError("twice-universal combiner needs at least one learner");
    const Eigen::Index c = learners.front().probabilities.size();
    Vector best = learners.front().probabilities;
    for (const auto& l : learners) {
        if (l.probabilities.size() != c) throw InputError("learners disagree on the number of classes");
        best = best.cwiseMax(l.probabilities);
    }
    const double total = best.sum();
    CategoricalPredictive out;
    out.probabilities = best / total;
    out.regret = std::log(total);
    return out;
}

}  // namespace pnml::softmax

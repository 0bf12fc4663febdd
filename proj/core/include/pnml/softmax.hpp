#pragma once

// pNML for a single softmax layer on top of fixed embeddings.
//
// Adding (x, c) to the training set moves column c of the weights by
// g·(z − θ_cᵀx), where z is the log-partition at x and g depends only on the
// training embeddings. The genie probability of class c is then
// p_c / (p_c + p_c^a (1 − p_c)) with a = xᵀg.

#include <vector>

#include "pnml/linalg.hpp"
#include "pnml/types.hpp"

namespace pnml::softmax {

class EmbeddingSet {
public:
    // With normalize set, every row is scaled to unit L2 norm; a zero row is an
    // input error.
    EmbeddingSet(Matrix features, bool normalize = true,
                 std::optional<double> rank_tolerance = std::nullopt);

    const Matrix& features() const { return features_; }
    bool normalized() const { return normalize_; }
    Eigen::Index dimension() const { return features_.cols(); }
    Eigen::Index size() const { return features_.rows(); }
    const linalg::SpectralDecomposition& spectrum() const { return spectrum_; }

    // Applies the same normalization as the stored rows.
    Vector prepare(const Vector& x) const;
    // xᵀX⁺X⁺ᵀx
    double pinv_quadratic_form(const Vector& x) const;

private:
    Matrix features_;
    bool normalize_;
    linalg::SpectralDecomposition spectrum_;
};

struct GVector {
    Vector g;
    double xg = 0.0;  // xᵀg
    bool in_span = false;
};

// g = x⊥/‖x⊥‖² when ‖x⊥‖ > 1e-10·max(1, ‖x‖), else X⁺X⁺ᵀx / (1 + xᵀX⁺X⁺ᵀx).
// x is used as given; call prepare() first for normalized sets.
GVector g_vector(const EmbeddingSet& set, const Vector& x);

// Genie values p_i/(p_i + p_i^a(1 − p_i)) with p clipped to [1e-12, 1 − 1e-12];
// q is their normalization and Γ the log of their sum.
CategoricalPredictive analytic_regret(const Vector& probabilities, double a);

// Genie value of one class.
double genie_probability(double p, double a);

struct TrainingOptions {
    double learning_rate = 0.1;
    int epochs = 500;
    // Fine-tuning stops with NumericalError after this many consecutive epochs
    // of increasing loss.
    int divergence_patience = 3;
};

// Softmax layer without bias: p(c|x) = softmax(θᵀx)_c, θ is d×C.
class SoftmaxHead {
public:
    SoftmaxHead(Matrix weights);

    static SoftmaxHead zeros(Eigen::Index dimension, int num_classes);

    const Matrix& weights() const { return weights_; }
    int num_classes() const { return static_cast<int>(weights_.cols()); }
    Eigen::Index dimension() const { return weights_.rows(); }

    Vector probabilities(const Vector& x) const;
    Matrix probabilities(const Matrix& x) const;  // one row per sample

    // Mean cross-entropy over the rows.
    double loss(const Matrix& x, const std::vector<int>& labels) const;

    // Full-batch gradient descent on the mean cross-entropy. Returns the loss
    // after every epoch.
    std::vector<double> train(const Matrix& x, const std::vector<int>& labels,
                              const TrainingOptions& options);

private:
    Matrix weights_;
};

// ERM head trained from zero weights with the default options.
SoftmaxHead fit_erm(const EmbeddingSet& set, const std::vector<int>& labels, int num_classes,
                    const TrainingOptions& options = {});

struct OodScore {
    double regret = 0.0;
    double xg = 0.0;
    Vector erm_probabilities;
    CategoricalPredictive pnml;
};

// prepare → ERM softmax → g_vector → analytic_regret. Higher Γ means less like
// the training data.
OodScore ood_score(const EmbeddingSet& set, const SoftmaxHead& head, const Vector& x);

struct FineTuneOptions {
    double learning_rate = 1e-3;
    int epochs = 10;
    int divergence_patience = 3;
};

// For each label y, fine-tune a copy of the ERM head on the training set plus
// (x, y) and read p(y|x) from it. The values are normalized into q and
// Γ = log Σ_y p_y.
CategoricalPredictive trained_pnml(const EmbeddingSet& set, const std::vector<int>& labels,
                                   const SoftmaxHead& erm, const Vector& x,
                                   const FineTuneOptions& options = {});

// p_i ∝ max_k q_k(i); Γ = log Σ_i max_k q_k(i).
CategoricalPredictive twice_universal(const std::vector<CategoricalPredictive>& learners);

}  // namespace pnml::softmax

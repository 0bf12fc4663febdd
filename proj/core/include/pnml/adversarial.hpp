#pragma once

// Small fully connected classifier with exact backpropagation, L∞ attacks,
// and the refinement defense: each candidate label gets one signed-gradient
// step toward itself, and the probabilities of those refined inputs are
// normalized into the prediction.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "pnml/types.hpp"

namespace pnml::adversarial {

// ReLU hidden layers, softmax output. Inputs are rows of a batch matrix.
class ToyMlp {
public:
    // widths = {in, hidden..., classes}; He-uniform initialization from seed.
    ToyMlp(std::vector<int> widths, std::uint64_t seed);

    const std::vector<int>& widths() const { return widths_; }
    int num_classes() const { return widths_.back(); }
    int input_dimension() const { return widths_.front(); }

    Matrix logits(const Matrix& x) const;
    Matrix probabilities(const Matrix& x) const;
    Vector probabilities(const Vector& x) const;
    std::vector<int> predict(const Matrix& x) const;

    struct Gradients {
        Vector losses;              // per-sample cross-entropy
        Matrix input;               // ∂CE_i/∂x_i, one row per sample
        std::vector<Matrix> weights;  // ∂(Σ CE_i)/∂W_l
        std::vector<Vector> biases;
    };
    // Cross-entropy of every row against its label plus all gradients.
    Gradients backward(const Matrix& x, const std::vector<int>& labels) const;
    // Losses and input gradients only; skips the weight gradients.
    std::pair<Vector, Matrix> input_gradient(const Matrix& x, const std::vector<int>& labels) const;
    Vector losses(const Matrix& x, const std::vector<int>& labels) const;

    // Flat parameter view, used by gradient checks.
    Eigen::Index parameter_count() const;
    Vector parameters() const;
    void set_parameters(const Vector& flat);
    static Vector flatten(const std::vector<Matrix>& weights, const std::vector<Vector>& biases);

    std::vector<Matrix>& weight_matrices() { return weights_; }
    std::vector<Vector>& bias_vectors() { return biases_; }

private:
    Gradients backprop(const Matrix& x, const std::vector<int>& labels, bool with_weights) const;

    std::vector<int> widths_;
    std::vector<Matrix> weights_;  // W_l is out×in
    std::vector<Vector> biases_;
};

// sign with sign(0) = 0
Matrix signed_step(const Matrix& g);

struct AttackConfig {
    double epsilon = 0.5;
    double step = 0.25;
    int iterations = 4;
    int restarts = 1;
    bool random_start = true;
    bool targeted = false;
    std::uint64_t seed = 42;
    // Optional box constraint applied after every step (off for the 2D toy).
    std::optional<std::pair<double, double>> clip;
};

// Per-sample losses and input gradients of whatever the attacker maximizes.
using LossGradient = std::function<std::pair<Vector, Matrix>(const Matrix&, const std::vector<int>&)>;

LossGradient cross_entropy_objective(const ToyMlp& model);

// x ± ε·sign(∇CE): + moves away from `labels` (untargeted), − toward them.
Matrix fgsm(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels, double epsilon,
            bool targeted = false);

// Signed steps with projection onto the ε-ball around x; with several restarts
// the per-sample result with the highest objective is kept.
Matrix pgd(const LossGradient& objective, const Matrix& x, const std::vector<int>& labels,
           const AttackConfig& config);
Matrix pgd(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
           const AttackConfig& config);

struct RefineConfig {
    double strength = 0.6;
    // More than one step splits the strength into equal signed steps, each
    // with a fresh gradient.
    int steps = 1;
};

// x − λ·sign(∇_x CE(x, y)) for the hypothesized labels y.
Matrix refine(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
              const RefineConfig& config);

struct DefenseOutput {
    Matrix probabilities;  // one normalized row per sample
    Vector regrets;        // log K per sample
    std::vector<int> predictions;
};

// q(y|x) ∝ p(y | refine(x, y)) for every class y.
DefenseOutput adversarial_pnml_predict(const ToyMlp& model, const Matrix& x, const RefineConfig& config);
CategoricalPredictive adversarial_pnml_predict(const ToyMlp& model, const Vector& x,
                                               const RefineConfig& config);

// −log q(y|x) of the defense with ∂x_refine/∂x replaced by the identity:
// ∇ = g_y − Σ_c q_c g_c where g_c = ∇CE(refine(x, c), c).
LossGradient defense_objective(const ToyMlp& model, const RefineConfig& config);

// PGD against the defended pipeline through the identity approximation.
Matrix adaptive_attack(const ToyMlp& model, const Matrix& x, const std::vector<int>& labels,
                       const RefineConfig& refine_config, const AttackConfig& config);

// Two classes in 2D: N(0, 0.01·I) labeled 0 and a center drawn uniformly on the
// radius-2 circle plus N(0, 0.01·I) labeled 1.
ClassificationDataset make_ring_dataset(int points_per_class, std::mt19937_64& rng);

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 0;  // 0 means full batch
    // Adversarial examples regenerated every epoch; nullopt trains on clean data.
    std::optional<AttackConfig> adversary;
    std::uint64_t seed = 42;
};

// SGD with momentum on the mean cross-entropy. Returns the mean loss per epoch.
std::vector<double> train(ToyMlp& model, const ClassificationDataset& data, const TrainConfig& config);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

struct ToyBenchmarkConfig {
    int points_per_class = 2000;
    int test_points_per_class = 500;
    int hidden_width = 100;
    int hidden_layers = 3;
    TrainConfig training;
    double train_epsilon = 0.5;
    double train_step = 0.25;
    int train_iterations = 4;
    double test_epsilon = 0.95;
    double test_step = 0.25;
    int test_iterations = 10;
    int restarts = 1;
    RefineConfig refinement;
    std::uint64_t seed = 42;
};

struct ToyBenchmarkResult {
    double clean_acc = 0.0;
    double clean_acc_defense = 0.0;
    double pgd_acc_base = 0.0;
    double pgd_acc_defense = 0.0;
    double adaptive_acc_defense = 0.0;
};

// Adversarially trained model on the ring data, attacked at the test budget.
ToyBenchmarkResult run_toy_benchmark(const ToyBenchmarkConfig& config);

}  // namespace pnml::adversarial

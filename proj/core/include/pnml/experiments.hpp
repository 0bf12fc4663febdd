#pragma once

// Desk-scale experiment drivers shared by the CLI, tests and benchmarks.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "pnml/data.hpp"
#include "pnml/types.hpp"

namespace pnml::experiments {

// Scalar inputs t with real targets, mapped to features per model size.
struct CurveProblem {
    Vector t_train;
    Vector y_train;
    Vector t_test;
    Vector y_test;
};

// t ~ U[−1, 1], y = sin(πt) + N(0, noise_sd²).
CurveProblem make_cosine_problem(int train_size, int test_size, double noise_sd, std::mt19937_64& rng);

struct DoubleDescentRow {
    int model_size = 0;
    double ratio = 0.0;  // M / N
    double mean_log_loss = 0.0;
    double mean_regret = 0.0;
    double mean_bound = 0.0;
};

// For every M the features are feature_map(t, kind, M − 1). M ≤ N uses the
// least-squares pNML (λ = 0), M > N the norm-constrained learner with the
// empirical regret. Log-loss is −log q(y_test|x_test) of the pNML predictive.
std::vector<DoubleDescentRow> double_descent(const CurveProblem& problem, const std::vector<int>& model_sizes,
                                             double noise_variance,
                                             data::FeatureKind kind = data::FeatureKind::Cosine);

struct ThresholdRow {
    double threshold = 0.0;
    int retained = 0;
    double retained_fraction = 0.0;
    double mean_loss = std::numeric_limits<double>::quiet_NaN();  // NaN when nothing is retained
    bool empty = true;
};

// Keeps the samples with regret ≤ threshold and averages their loss.
std::vector<ThresholdRow> regret_threshold_eval(const std::vector<double>& regrets, const std::vector<double>& losses,
                                                const std::vector<double>& thresholds);

}  // namespace pnml::experiments

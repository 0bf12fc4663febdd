#pragma once

// pNML with a Gaussian luckiness function w(θ) = exp(−λ‖θ‖²/(2σ²)) for ridge
// regression, the matching Bayesian predictive, and leave-one-out selection of
// (λ, σ²).

#include <vector>

#include "pnml/regression.hpp"
#include "pnml/types.hpp"

namespace pnml::luckiness {

struct LpnmlPredictive {
    double ridge_mean = 0.0;      // xᵀθ̂_λ
    double shift = 0.0;           // μ̂, subtracted from the ridge mean
    double variance = 1.0;        // σ̂²
    double log_constant = 0.0;    // log c
    double regret = 0.0;          // log c + ½ log(σ̂²/σ²), may be negative

    double mean() const { return ridge_mean - shift; }
    GaussianPredictive predictive() const { return {mean(), variance, regret}; }
};

// With K = 1 + xᵀPx and P = (XᵀX + λI)⁻¹:
//   μ̂  = λK·θ̂ᵀPx / (1 + λxᵀP²x)
//   σ̂² = σ²K² / (1 + λxᵀP²x)
//   log c = [(λθ̂ᵀPx)² / (1 + λxᵀP²x) − λ‖θ̂‖²] / (2σ²)
LpnmlPredictive lpnml_predict(const regression::RegressionFit& fit, const Vector& x);

// Posterior predictive under the prior θ ~ N(0, σ²/λ · I): N(θ̂ᵀx, σ²(1 + xᵀPx)).
// The regret field is left at 0.
GaussianPredictive bayesian_predict(const regression::RegressionFit& fit, const Vector& x);

enum class LearnerKind { Ridge, Bayesian, Lpnml };

struct TuningGrid {
    std::vector<double> lambdas;
    std::vector<double> noise_variances;

    // 40 log-spaced λ in [1e-6, 1e3] and 20 log-spaced σ² in [1e-3, 1e2].
    static TuningGrid defaults();
};

std::vector<double> log_space(double lo, double hi, int count);

struct TuningResult {
    double lambda = 0.0;
    double noise_variance = 1.0;
    std::vector<double> fold_lambdas;
    std::vector<double> fold_noise_variances;
    // Grid pair with the smallest total log-loss over all folds.
    double pooled_lambda = 0.0;
    double pooled_noise_variance = 1.0;
};

// Leave-one-out: each held-out sample picks the grid pair with the smallest
// log-loss (lowest index on ties); the result is the mean of the N fold optima.
// The pooled optimum is reported alongside.
TuningResult loo_tune(const LabeledDataset& data, const TuningGrid& grid, LearnerKind kind);

// Log-loss −log q(y|x) of one learner at a fixed fit.
double log_loss(const regression::RegressionFit& fit, const Vector& x, double y, LearnerKind kind);

}  // namespace pnml::luckiness

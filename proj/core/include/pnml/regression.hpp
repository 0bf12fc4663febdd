#pragma once

// Exact pNML learner for (ridge) linear regression with Gaussian noise.
//
// Given the ridge fit θ = (XᵀX + λI)⁻¹XᵀY and s = xᵀ(XᵀX + λI)⁻¹x, the genie
// that also fits the test pair (x, y) predicts xᵀθ + s/(1+s)·(y − xᵀθ). Its
// density integrates to K = 1 + s, so the pNML predictive is
// N(xᵀθ, σ²(1+s)²) with regret Γ = log(1 + s).

#include <vector>

#include "pnml/linalg.hpp"
#include "pnml/types.hpp"

namespace pnml::regression {

class RegressionFit {
public:
    // Throws SingularSystemError when λ = 0 and X does not have full column rank.
    static RegressionFit fit(const LabeledDataset& data, double lambda, double noise_variance = 1.0);

    const Vector& weights() const { return weights_; }
    double lambda() const { return lambda_; }
    double noise_variance() const { return noise_variance_; }
    Eigen::Index dimension() const { return weights_.size(); }

    // Copy with a different σ²; the weights do not depend on it.
    RegressionFit with_noise_variance(double noise_variance) const;

    double predict(const Vector& x) const { return x.dot(weights_); }
    // xᵀ(XᵀX + λI)⁻¹x
    double quadratic_form(const Vector& x) const;
    // (XᵀX + λI)⁻¹x
    Vector solve(const Vector& x) const { return factor_.solve(x); }
    Matrix inverse_gram() const;

    const linalg::SpectralDecomposition& spectrum() const { return spectrum_; }

private:
    RegressionFit() = default;

    Vector weights_;
    double lambda_ = 0.0;
    double noise_variance_ = 1.0;
    Eigen::LLT<Matrix> factor_;
    linalg::SpectralDecomposition spectrum_;
};

GaussianPredictive pnml_predict(const RegressionFit& fit, const Vector& x);

// Per-direction contributions (xᵀu_m)² / (h_m² + λ) to s, one per feature
// basis vector. For λ = 0 these are the (xᵀu_m)²/h_m² terms.
struct RegretSpectrum {
    std::vector<double> terms;
    std::vector<double> singular_values;  // h_m, zero-padded to M entries
    double normalization = 1.0;           // 1 + Σ terms
    double regret = 0.0;                  // log(normalization)
};

RegretSpectrum regret_spectrum(const RegressionFit& fit, const Vector& x);

}  // namespace pnml::regression

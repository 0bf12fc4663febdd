#pragma once

// pNML for over-parameterized linear regression with the hypothesis set
// restricted to ‖θ‖ ≤ ‖θ*‖, θ* = X⁺Y the minimum-norm interpolator.
//
// For a hypothesized label y the genie is the ridge solution on the augmented
// set at the λ(y) that puts it back on the sphere ‖θ‖ = ‖θ*‖. The regret is the
// log of the integral of its density over y.

#include <optional>

#include "pnml/linalg.hpp"
#include "pnml/types.hpp"

namespace pnml::overparam {

class MinNormFit {
public:
    static MinNormFit fit(const LabeledDataset& data, double noise_variance = 1.0,
                          std::optional<double> rank_tolerance = std::nullopt);

    const Vector& weights() const { return weights_; }
    double squared_norm() const { return squared_norm_; }
    double noise_variance() const { return noise_variance_; }
    const Matrix& pseudo_inverse() const { return pinv_.matrix; }
    const linalg::SpectralDecomposition& spectrum() const { return spectrum_; }
    Eigen::Index dimension() const { return weights_.size(); }

    double predict(const Vector& x) const { return x.dot(weights_); }
    // vᵀX⁺X⁺ᵀv = Σ_{i<r} (u_iᵀv)² / h_i²
    double pinv_quadratic_form(const Vector& v) const;
    Vector orthogonal_residual(const Vector& x) const;
    // τ⊥ = 1e-10 · max(1, ‖x‖)
    static double in_span_threshold(const Vector& x);

    const Vector& targets() const { return targets_; }

private:
    MinNormFit() = default;

    Vector weights_;
    Vector targets_;
    double squared_norm_ = 0.0;
    double noise_variance_ = 1.0;
    linalg::PseudoInverse pinv_;
    linalg::SpectralDecomposition spectrum_;
};

// ‖θ*_{N+1}‖² = ‖θ*_N‖² + (y − xᵀθ*_N)² / ‖x⊥‖². Throws InSpanError when
// ‖x⊥‖ ≤ τ⊥.
double mn_norm_recursion(const MinNormFit& fit, const Vector& x, double y);

// Lower bound on the λ(y) that satisfies the norm constraint, from the tangent
// of ‖θ(λ)‖² at λ = 0 on the augmented set.
double lambda_lower_bound(const MinNormFit& fit, const Vector& x, double y);

struct NormConstrainedGenie {
    double label = 0.0;
    double lambda = 0.0;
    double prediction = 0.0;  // xᵀθ̂
    double squared_norm = 0.0;
    double density = 0.0;     // p_θ̂(y|x)
    int iterations = 0;
};

struct RootFinderOptions {
    double lower = 1e-12;
    double upper = 1e12;
    double relative_tolerance = 1e-10;
    int max_iterations = 200;
};

// Genie evaluation for one test vector. Everything is expressed in the SVD
// basis of the training matrix, so each label costs O(rank) per λ trial.
class GenieSolver {
public:
    GenieSolver(const MinNormFit& fit, const Vector& x, RootFinderOptions options = {});

    // Throws NumericalError if the bisection cannot bracket or converge.
    NormConstrainedGenie solve(double y) const;
    // Genie quantities at a given λ (λ = 0 means the minimum-norm refit).
    NormConstrainedGenie evaluate(double y, double lambda) const;
    Vector weights(double y, double lambda) const;

    // xᵀθ_N^λ and 1 + xᵀ(XᵀX + λI)⁻¹x for the training-only ridge fit.
    double ridge_prediction(double lambda) const;
    double ridge_normalizer(double lambda) const;

    double residual_norm_squared() const { return perp_sq_; }
    double mn_prediction() const { return mn_prediction_; }
    double k0() const { return k0_; }

private:
    const MinNormFit* fit_;
    Vector x_;
    Vector perp_;
    Vector proj_;   // u_iᵀx, i < r
    Vector coef_;   // v_iᵀY, i < r
    Vector h_;      // h_i, i < r
    double perp_sq_ = 0.0;
    double mn_prediction_ = 0.0;
    double k0_ = 1.0;
    RootFinderOptions options_;
};

// Lemma envelope: N(0, σ²K0²(1 + ‖x⊥‖²/(K0λ))²) shape centered at xᵀθ_N^λ,
// without the matching normalization (peak value 1/√(2πσ²)).
double genie_density_upper_bound(const GenieSolver& genie, double y, double lambda,
                                 double noise_variance);

struct EmpiricalRegret {
    double regret = 0.0;
    double normalization = 1.0;
    double error_estimate = 0.0;
    bool in_span = false;
    double window_low = 0.0;
    double window_high = 0.0;
};

// log ∫ p_θ̂(y')(y'|x) dy'. In-span test vectors fall back to log K0.
EmpiricalRegret empirical_regret(const MinNormFit& fit, const Vector& x);

// log[(1 + xᵀX⁺X⁺ᵀx)(1 + 2‖x⊥‖²) + 3·∛(‖x⊥‖²·θ*ᵀX⁺X⁺ᵀθ* / (πσ²))]
double regret_upper_bound(const MinNormFit& fit, const Vector& x);

}  // namespace pnml::overparam

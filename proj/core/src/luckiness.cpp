#include "pnml/luckiness.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "pnml/error.hpp"
#include "pnml/parallel.hpp"

namespace pnml::luckiness {

namespace {

void check_input(const regression::RegressionFit& fit, const Vector& x) {
    if (x.size() != fit.dimension()) {
        throw InputError("test vector has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(fit.dimension()));
    }
    linalg::require_finite(x, "test vector");
}

// Mean and σ²-free variance factor of each learner; all three predictives
// have variance σ² · factor.
struct Shape {
    double mean = 0.0;
    double factor = 1.0;
};

Shape learner_shape(const regression::RegressionFit& fit, const Vector& x, LearnerKind kind) {
    const double ridge_mean = fit.predict(x);
    switch (kind) {
        case LearnerKind::Ridge:
            return {ridge_mean, 1.0};
        case LearnerKind::Bayesian:
            return {ridge_mean, 1.0 + fit.quadratic_form(x)};
        case LearnerKind::Lpnml: {
            const LpnmlPredictive p = lpnml_predict(fit, x);
            return {p.mean(), p.variance / fit.noise_variance()};
        }
    }
    return {ridge_mean, 1.0};
}

double gaussian_nll(double y, double mean, double variance) {
    const double r = y - mean;
    return 0.5 * std::log(2.0 * std::numbers::pi * variance) + 0.5 * r * r / variance;
}

}  // namespace

LpnmlPredictive lpnml_predict(const regression::RegressionFit& fit, const Vector& x) {
    check_input(fit, x);
    const double lambda = fit.lambda();
    const double sigma2 = fit.noise_variance();
    const Vector px = fit.solve(x);
    const double xpx = x.dot(px);
    const double xp2x = px.squaredNorm();
    const double k = 1.0 + xpx;
    const double theta_px = fit.weights().dot(px);
    const double denom = 1.0 + lambda * xp2x;

    LpnmlPredictive out;
    out.ridge_mean = fit.predict(x);
    out.shift = lambda * k * theta_px / denom;
    out.variance = sigma2 * k * k / denom;
    const double lt = lambda * theta_px;
    out.log_constant = (lt * lt / denom - lambda * fit.weights().squaredNorm()) / (2.0 * sigma2);
    out.regret = out.log_constant + 0.5 * std::log(out.variance / sigma2);
    return out;
}

GaussianPredictive bayesian_predict(const regression::RegressionFit& fit, const Vector& x) {
    check_input(fit, x);
    GaussianPredictive out;
    out.mean = fit.predict(x);
    out.variance = fit.noise_variance() * (1.0 + fit.quadratic_form(x));
    return out;
}

std::vector<double> log_space(double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw InputError("log_space: invalid range");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
    return out;
}

TuningGrid TuningGrid::defaults() {
    return {log_space(1e-6, 1e3, 40), log_space(1e-3, 1e2, 20)};
}

double log_loss(const regression::RegressionFit& fit, const Vector& x, double y, LearnerKind kind) {
    const Shape s = learner_shape(fit, x, kind);
    return gaussian_nll(y, s.mean, fit.noise_variance() * s.factor);
}

TuningResult loo_tune(const LabeledDataset& data, const TuningGrid& grid, LearnerKind kind) {
    if (grid.lambdas.empty() || grid.noise_variances.empty()) throw InputError("tuning grid is empty");
    for (double l : grid.lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("lambda grid values must be finite and >= 0");
    }
    for (double s : grid.noise_variances) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InputError("noise variance grid values must be > 0");
    }
    const Eigen::Index n = data.size();
    if (n < 2) throw InputError("leave-one-out tuning needs at least 2 samples");
    if (data.targets.size() != n) throw InputError("target vector length does not match the number of rows");

    TuningResult out;
    out.fold_lambdas.assign(n, 0.0);
    out.fold_noise_variances.assign(n, 0.0);
    const std::size_t n_sigma = grid.noise_variances.size();
    // Per-fold losses over the whole grid, rows = folds; +inf where λ is unusable.
    Matrix losses = Matrix::Constant(n, static_cast<Eigen::Index>(grid.lambdas.size() * n_sigma),
                                     std::numeric_limits<double>::infinity());

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t fold) {
        const Eigen::Index held = static_cast<Eigen::Index>(fold);
        LabeledDataset train{Matrix(n - 1, data.dimension()), Vector(n - 1)};
        for (Eigen::Index i = 0, j = 0; i < n; ++i) {
            if (i == held) continue;
            train.features.row(j) = data.features.row(i);
            train.targets(j) = data.targets(i);
            ++j;
        }
        const Vector x = data.features.row(held).transpose();
        const double y = data.targets(held);

        double best = std::numeric_limits<double>::infinity();
        double best_lambda = grid.lambdas.front();
        double best_sigma2 = grid.noise_variances.front();
        for (std::size_t li = 0; li < grid.lambdas.size(); ++li) {
            const double lambda = grid.lambdas[li];
            // λ = 0 on a rank-deficient fold has no ridge solution; skip it.
            std::optional<regression::RegressionFit> fit;
            try {
                fit.emplace(regression::RegressionFit::fit(train, lambda, 1.0));
            } catch (const SingularSystemError&) {
                continue;
            }
            const Shape shape = learner_shape(*fit, x, kind);
            for (std::size_t si = 0; si < n_sigma; ++si) {
                const double sigma2 = grid.noise_variances[si];
                // The LpNML shape depends on σ² only through the variance scale.
                const double loss = gaussian_nll(y, shape.mean, sigma2 * shape.factor);
                losses(held, static_cast<Eigen::Index>(li * n_sigma + si)) = loss;
                if (loss < best) {
                    best = loss;
                    best_lambda = lambda;
                    best_sigma2 = sigma2;
                }
            }
        }
        if (!std::isfinite(best)) {
            throw SingularSystemError("leave-one-out fold " + std::to_string(fold) +
                                      " has no usable lambda on the grid");
        }
        out.fold_lambdas[fold] = best_lambda;
        out.fold_noise_variances[fold] = best_sigma2;
    });

    double sum_lambda = 0.0;
    double sum_sigma2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sum_lambda += out.fold_lambdas[i];
        sum_sigma2 += out.fold_noise_variances[i];
    }
    out.lambda = sum_lambda / static_cast<double>(n);
    out.noise_variance = sum_sigma2 / static_cast<double>(n);

    const Vector totals = losses.colwise().sum().transpose();
    Eigen::Index best = 0;
    totals.minCoeff(&best);
    out.pooled_lambda = grid.lambdas[static_cast<std::size_t>(best) / n_sigma];
    out.pooled_noise_variance = grid.noise_variances[static_cast<std::size_t>(best) % n_sigma];
    return out;
}

}  // namespace pnml::luckiness

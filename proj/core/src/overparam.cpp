#include "pnml/overparam.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pnml/error.hpp"

namespace pnml::overparam {

namespace {

void check_dimension(const MinNormFit& fit, const Vector& x) {
    if (x.size() != fit.dimension()) {
        throw InputError("test vector has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(fit.dimension()));
    }
    linalg::require_finite(x, "test vector");
}

}  // namespace

MinNormFit MinNormFit::fit(const LabeledDataset& data, double noise_variance,
                           std::optional<double> rank_tolerance) {
    if (data.targets.size() != data.features.rows()) {
        throw InputError("target vector length does not match the number of rows");
    }
    linalg::require_finite(data.targets, "training targets");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw InputError("noise variance must be finite and > 0");
    }
    MinNormFit out;
    out.spectrum_ = linalg::svd(data.features, rank_tolerance);
    out.pinv_ = linalg::pinv(data.features, out.spectrum_.rank_tolerance);
    out.weights_ = out.pinv_.matrix * data.targets;
    out.targets_ = data.targets;
    out.squared_norm_ = out.weights_.squaredNorm();
    out.noise_variance_ = noise_variance;
    return out;
}

double MinNormFit::pinv_quadratic_form(const Vector& v) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < spectrum_.rank; ++i) {
        const double a = spectrum_.feature_basis.col(i).dot(v) / spectrum_.singular_values(i);
        total += a * a;
    }
    return total;
}

Vector MinNormFit::orthogonal_residual(const Vector& x) const {
    return linalg::orthogonal_residual(spectrum_, x);
}

double MinNormFit::in_span_threshold(const Vector& x) {
    return 1e-10 * std::max(1.0, x.norm());
}

double mn_norm_recursion(const MinNormFit& fit, const Vector& x, double y) {
    check_dimension(fit, x);
    const Vector perp = fit.orthogonal_residual(x);
    const double perp_norm = perp.norm();
    if (perp_norm <= MinNormFit::in_span_threshold(x)) {
        throw InSpanError("test vector lies in the training row space (‖x⊥‖ = " +
                          std::to_string(perp_norm) + "); use the ordinary pNML learner");
    }
    const double r = y - fit.predict(x);
    return fit.squared_norm() + r * r / (perp_norm * perp_norm);
}

double lambda_lower_bound(const MinNormFit& fit, const Vector& x, double y) {
    check_dimension(fit, x);
    const Vector perp = fit.orthogonal_residual(x);
    const double perp_sq = perp.squaredNorm();
    if (std::sqrt(perp_sq) <= MinNormFit::in_span_threshold(x)) {
        throw InSpanError("test vector lies in the training row space");
    }
    const double r = y - fit.predict(x);
    if (r == 0.0) return 0.0;
    // ‖θ(λ)‖² is convex in λ, so it lies above its tangent at λ = 0:
    // ‖θ*_{N+1}‖² − 2λ·θ*_{N+1}ᵀ(X_{N+1}ᵀX_{N+1})⁺θ*_{N+1}. The slope term is
    // Σ (u_iᵀY)²/s_i⁴ over the augmented SVD.
    const auto& s = fit.spectrum();
    Matrix xa(s.sample_basis.rows() + 1, x.size());
    xa << s.reconstruct(), x.transpose();
    Vector ya(xa.rows());
    ya << fit.targets(), y;
    const auto aug = linalg::svd(xa);
    double slope = 0.0;
    for (Eigen::Index i = 0; i < aug.rank; ++i) {
        const double c = aug.sample_basis.col(i).dot(ya) / (aug.singular_values(i) * aug.singular_values(i));
        slope += c * c;
    }
    return 0.5 * (r * r / perp_sq) / slope;
}

GenieSolver::GenieSolver(const MinNormFit& fit, const Vector& x, RootFinderOptions options)
    : fit_(&fit), x_(x), options_(options) {
    check_dimension(fit, x);
    const auto& s = fit.spectrum();
    const Eigen::Index r = s.rank;
    h_ = s.singular_values.head(r);
    proj_ = s.feature_basis.leftCols(r).transpose() * x;
    coef_ = s.sample_basis.leftCols(r).transpose() * fit.targets();
    perp_ = fit.orthogonal_residual(x);
    perp_sq_ = perp_.squaredNorm();
    mn_prediction_ = fit.predict(x);
    k0_ = 1.0 + fit.pinv_quadratic_form(x);
}

double GenieSolver::ridge_prediction(double lambda) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < h_.size(); ++i) {
        total += h_(i) * coef_(i) * proj_(i) / (h_(i) * h_(i) + lambda);
    }
    return total;
}

double GenieSolver::ridge_normalizer(double lambda) const {
    double q = 0.0;
    for (Eigen::Index i = 0; i < h_.size(); ++i) q += proj_(i) * proj_(i) / (h_(i) * h_(i) + lambda);
    return 1.0 + q + perp_sq_ / lambda;
}

NormConstrainedGenie GenieSolver::evaluate(double y, double lambda) const {
    NormConstrainedGenie g;
    g.label = y;
    g.lambda = lambda;
    const double sigma2 = fit_->noise_variance();
    const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);

    if (std::isinf(lambda)) {
        g.prediction = 0.0;
        g.squared_norm = 0.0;
        g.density = peak * std::exp(-0.5 * y * y / sigma2);
        return g;
    }

    // θ̂ = Σ t_i u_i + γ x⊥ with γ = (y − xᵀθ_N^λ) / (λ(1 + q) + ‖x⊥‖²)
    double q = 0.0;
    double ridge_pred = 0.0;
    for (Eigen::Index i = 0; i < h_.size(); ++i) {
        const double d = h_(i) * h_(i) + lambda;
        q += proj_(i) * proj_(i) / d;
        ridge_pred += h_(i) * coef_(i) * proj_(i) / d;
    }
    const double denom = lambda * (1.0 + q) + perp_sq_;
    const double gamma = (y - ridge_pred) / denom;

    double norm_sq = gamma * gamma * perp_sq_;
    double pred = gamma * perp_sq_;
    for (Eigen::Index i = 0; i < h_.size(); ++i) {
        const double t = (h_(i) * coef_(i) + lambda * gamma * proj_(i)) / (h_(i) * h_(i) + lambda);
        norm_sq += t * t;
        pred += proj_(i) * t;
    }
    const double residual = lambda * (y - ridge_pred) / denom;
    g.prediction = pred;
    g.squared_norm = norm_sq;
    g.density = peak * std::exp(-0.5 * residual * residual / sigma2);
    return g;
}

Vector GenieSolver::weights(double y, double lambda) const {
    const auto& basis = fit_->spectrum().feature_basis;
    if (std::isinf(lambda)) return Vector::Zero(x_.size());
    double q = 0.0;
    for (Eigen::Index i = 0; i < h_.size(); ++i) q += proj_(i) * proj_(i) / (h_(i) * h_(i) + lambda);
    const double ridge_pred = ridge_prediction(lambda);
    const double gamma = (y - ridge_pred) / (lambda * (1.0 + q) + perp_sq_);
    Vector w = gamma * perp_;
    for (Eigen::Index i = 0; i < h_.size(); ++i) {
        const double t = (h_(i) * coef_(i) + lambda * gamma * proj_(i)) / (h_(i) * h_(i) + lambda);
        w += t * basis.col(i);
    }
    return w;
}

NormConstrainedGenie GenieSolver::solve(double y) const {
    if (std::sqrt(perp_sq_) <= MinNormFit::in_span_threshold(x_)) {
        throw InSpanError("test vector lies in the training row space; the genie is the ordinary pNML one");
    }
    const double target = fit_->squared_norm();
    if (target == 0.0) return evaluate(y, std::numeric_limits<double>::infinity());
    if (y == mn_prediction_) return evaluate(y, 0.0);

    auto excess = [&](double lambda) { return evaluate(y, lambda).squared_norm - target; };

    double lo = options_.lower;
    double hi = options_.upper;
    int iterations = 0;
    while (excess(hi) > 0.0) {
        hi *= 1e6;
        if (!std::isfinite(hi) || hi > 1e300) {
            throw NumericalError("norm constraint root finder: could not bracket from above (y = " +
                                 std::to_string(y) + ")");
        }
    }
    while (excess(lo) < 0.0) {
        lo *= 1e-6;
        if (lo < 1e-300) {
            // residual is so small that the constraint is met at λ ≈ 0
            NormConstrainedGenie g = evaluate(y, 0.0);
            return g;
        }
    }
    while (hi / lo - 1.0 > options_.relative_tolerance) {
        if (++iterations > options_.max_iterations) {
            throw NumericalError("norm constraint root finder did not converge in " +
                                 std::to_string(options_.max_iterations) + " iterations (bracket [" +
                                 std::to_string(lo) + ", " + std::to_string(hi) + "], y = " +
                                 std::to_string(y) + ")");
        }
        const double mid = std::sqrt(lo * hi);
        if (excess(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const NormConstrainedGenie at_lo = evaluate(y, lo);
    const NormConstrainedGenie at_hi = evaluate(y, hi);
    NormConstrainedGenie g =
        std::abs(at_lo.squared_norm - target) <= std::abs(at_hi.squared_norm - target) ? at_lo : at_hi;
    g.iterations = iterations;
    return g;
}

double genie_density_upper_bound(const GenieSolver& genie, double y, double lambda,
                                 double noise_variance) {
    const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * noise_variance);
    if (lambda <= 0.0) return peak;
    const double k0 = genie.k0();
    const double scale = k0 * (1.0 + genie.residual_norm_squared() / (k0 * lambda));
    const double r = y - genie.ridge_prediction(lambda);
    return peak * std::exp(-0.5 * r * r / (noise_variance * scale * scale));
}

EmpiricalRegret empirical_regret(const MinNormFit& fit, const Vector& x) {
    check_dimension(fit, x);
    // Tight root tolerance keeps the integrand smooth enough for the Kronrod
    // error estimate.
    RootFinderOptions options;
    options.relative_tolerance = 1e-13;
    GenieSolver genie(fit, x, options);
    EmpiricalRegret out;
    if (std::sqrt(genie.residual_norm_squared()) <= MinNormFit::in_span_threshold(x)) {
        out.in_span = true;
        out.normalization = genie.k0();
        out.regret = std::log(out.normalization);
        return out;
    }

    // The genie satisfies ‖θ̂‖ = ‖θ*‖, so |xᵀθ̂| ≤ B = ‖x‖‖θ*‖ and the density is
    // below a unit-variance Gaussian tail once |y'| > B. Ten σ past B leaves
    // under 1e-23 of mass outside the window.
    const double sigma = std::sqrt(fit.noise_variance());
    const double bound = x.norm() * std::sqrt(fit.squared_norm());
    const double center = genie.mn_prediction();
    out.window_low = -bound - 10.0 * sigma;
    out.window_high = bound + 10.0 * sigma;

    auto density = [&](double y) { return genie.solve(y).density; };

    // Geometric segments away from the peak so a narrow plateau is never
    // stepped over by the first Kronrod rule.
    double total = 0.0;
    double error = 0.0;
    for (int side : {-1, 1}) {
        const double reach = side > 0 ? out.window_high - center : center - out.window_low;
        double a = 0.0;
        double b = std::min(sigma, reach);
        while (a < reach) {
            double seg_error = 0.0;
            const double seg = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [&](double d) { return density(center + side * d); }, a, b, 15, 1e-10, &seg_error);
            total += seg;
            error += seg_error;
            a = b;
            b = std::min(2.0 * b, reach);
        }
    }
    if (!std::isfinite(total) || total <= 0.0) {
        throw NumericalError("empirical regret quadrature produced a non-positive normalization");
    }
    if (error > 1e-8 * total) {
        throw NumericalError("empirical regret quadrature error " + std::to_string(error) +
                             " exceeds tolerance for normalization " + std::to_string(total));
    }
    out.normalization = total;
    out.error_estimate = error;
    out.regret = std::log(total);
    return out;
}

double regret_upper_bound(const MinNormFit& fit, const Vector& x) {
    check_dimension(fit, x);
    const Vector perp = fit.orthogonal_residual(x);
    double perp_sq = perp.squaredNorm();
    if (std::sqrt(perp_sq) <= MinNormFit::in_span_threshold(x)) perp_sq = 0.0;
    const double k0 = 1.0 + fit.pinv_quadratic_form(x);
    const double theta_term = fit.pinv_quadratic_form(fit.weights());
    const double cube =
        std::cbrt(perp_sq * theta_term / (std::numbers::pi * fit.noise_variance()));
    return std::log(k0 * (1.0 + 2.0 * perp_sq) + 3.0 * cube);
}

}  // namespace pnml::overparam

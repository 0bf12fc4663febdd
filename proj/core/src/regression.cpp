#include "pnml/regression.hpp"

#include <cmath>
#include <string>

#include "pnml/error.hpp"

namespace pnml::regression {

RegressionFit RegressionFit::fit(const LabeledDataset& data, double lambda, double noise_variance) {
    const Matrix& x = data.features;
    if (x.rows() < 1 || x.cols() < 1) throw InputError("training set is empty");
    if (data.targets.size() != x.rows()) {
        throw InputError("target vector has " + std::to_string(data.targets.size()) +
                         " entries for " + std::to_string(x.rows()) + " rows");
    }
    linalg::require_finite(x, "training features");
    linalg::require_finite(data.targets, "training targets");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be finite and >= 0");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw InputError("noise variance must be finite and > 0");
    }

    RegressionFit out;
    out.lambda_ = lambda;
    out.noise_variance_ = noise_variance;
    out.spectrum_ = linalg::svd(x);

    if (lambda == 0.0 && out.spectrum_.rank < x.cols()) {
        throw SingularSystemError(
            "XᵀX is singular (rank " + std::to_string(out.spectrum_.rank) + " < " +
            std::to_string(x.cols()) +
            "); use lambda > 0 or the over-parameterized (minimum-norm) learner");
    }

    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    out.factor_.compute(gram);
    if (out.factor_.info() != Eigen::Success) {
        throw SingularSystemError("Cholesky factorization of XᵀX + λI failed");
    }
    out.weights_ = out.factor_.solve(x.transpose() * data.targets);
    return out;
}

RegressionFit RegressionFit::with_noise_variance(double noise_variance) const {
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw InputError("noise variance must be finite and > 0");
    }
    RegressionFit copy = *this;
    copy.noise_variance_ = noise_variance;
    return copy;
}

double RegressionFit::quadratic_form(const Vector& x) const {
    return linalg::inverse_quadratic_form(factor_, x);
}

Matrix RegressionFit::inverse_gram() const {
    return factor_.solve(Matrix::Identity(dimension(), dimension()));
}

GaussianPredictive pnml_predict(const RegressionFit& fit, const Vector& x) {
    if (x.size() != fit.dimension()) {
        throw InputError("test vector has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(fit.dimension()));
    }
    linalg::require_finite(x, "test vector");
    const double s = fit.quadratic_form(x);
    GaussianPredictive out;
    out.mean = fit.predict(x);
    out.variance = fit.noise_variance() * (1.0 + s) * (1.0 + s);
    out.regret = std::log1p(s);
    return out;
}

RegretSpectrum regret_spectrum(const RegressionFit& fit, const Vector& x) {
    if (x.size() != fit.dimension()) throw InputError("test vector dimension mismatch");
    const auto& s = fit.spectrum();
    const Eigen::Index m = fit.dimension();

    RegretSpectrum out;
    out.terms.reserve(m);
    out.singular_values.assign(m, 0.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double h = i < s.singular_values.size() ? s.singular_values(i) : 0.0;
        out.singular_values[i] = h;
        const double proj = s.feature_basis.col(i).dot(x);
        const double denom = h * h + fit.lambda();
        const double term = denom > 0.0 ? proj * proj / denom : 0.0;
        out.terms.push_back(term);
        total += term;
    }
    out.normalization = 1.0 + total;
    out.regret = std::log1p(total);
    return out;
}

}  // namespace pnml::regression

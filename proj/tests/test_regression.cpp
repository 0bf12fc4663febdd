#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pnml/error.hpp"
#include "pnml/regression.hpp"

using namespace pnml;

namespace {

LabeledDataset make_data(int n, int m, std::mt19937_64& rng) {
    return {oracle::gaussian_matrix(n, m, rng), oracle::gaussian_vector(n, rng)};
}

}  // namespace

TEST(Regression, RegretMatchesIntegratedGenie) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = oracle::uniform_int(1, 5, rng);
        const int n = oracle::uniform_int(m + 1, 12, rng);
        const double lambda = trial % 2 ? 0.5 : 0.0;
        const double variance = trial % 3 ? 1.0 : 0.3;
        const auto data = make_data(n, m, rng);
        const Vector x = oracle::gaussian_vector(m, rng);
        const auto fit = regression::RegressionFit::fit(data, lambda, variance);
        const auto q = regression::pnml_predict(fit, x);

        const oracle::RidgeGenie genie(data.features, data.targets, x, lambda, variance);
        const double k = oracle::integrate_line([&](double y) { return genie.density(y); }, fit.predict(x),
                                                std::sqrt(variance));
        EXPECT_NEAR(q.regret, std::log(k), 1e-7);
    }
}

TEST(Regression, PredictiveIntegratesToOne) {
    std::mt19937_64 rng(12);
    const auto data = make_data(10, 3, rng);
    const Vector x = oracle::gaussian_vector(3, rng);
    const auto q = regression::pnml_predict(regression::RegressionFit::fit(data, 0.2, 0.5), x);
    const double total = oracle::integrate_line([&](double y) { return q.density(y); }, q.mean, 1.0);
    EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Regression, VarianceIsNoiseTimesSquaredNormalizer) {
    std::mt19937_64 rng(13);
    const auto data = make_data(15, 4, rng);
    const auto fit = regression::RegressionFit::fit(data, 0.1, 2.0);
    const Vector x = oracle::gaussian_vector(4, rng);
    const Matrix a = data.features.transpose() * data.features + 0.1 * Matrix::Identity(4, 4);
    const double s = x.dot(a.inverse() * x);
    const auto q = regression::pnml_predict(fit, x);
    EXPECT_NEAR(q.variance, 2.0 * (1 + s) * (1 + s), 1e-10);
    EXPECT_NEAR(q.regret, std::log1p(s), 1e-12);
    EXPECT_NEAR(q.mean, x.dot(a.ldlt().solve(data.features.transpose() * data.targets)), 1e-10);
}

TEST(Regression, ZeroTestVectorHasZeroRegret) {
    std::mt19937_64 rng(14);
    const auto fit = regression::RegressionFit::fit(make_data(8, 3, rng), 0.0);
    EXPECT_EQ(regression::pnml_predict(fit, Vector::Zero(3)).regret, 0.0);
}

TEST(Regression, RegretShrinksAlongLargeSingularDirections) {
    // Same test norm, projected on the top vs the bottom singular direction.
    std::mt19937_64 rng(15);
    Matrix x = oracle::gaussian_matrix(30, 3, rng);
    x.col(2) *= 0.05;
    const auto fit = regression::RegressionFit::fit({x, oracle::gaussian_vector(30, rng)}, 0.0);
    const auto& s = fit.spectrum();
    const Vector top = s.feature_basis.col(0);
    const Vector bottom = s.feature_basis.col(2);
    EXPECT_LT(regression::pnml_predict(fit, top).regret, regression::pnml_predict(fit, bottom).regret);
}

TEST(Regression, RegretDecreasesWithMoreData) {
    std::mt19937_64 rng(16);
    const Matrix big = oracle::gaussian_matrix(40, 3, rng);
    const Vector y = oracle::gaussian_vector(40, rng);
    const Vector x = oracle::gaussian_vector(3, rng);
    double previous = 1e300;
    for (int n : {5, 10, 20, 40}) {
        const auto fit = regression::RegressionFit::fit({big.topRows(n), y.head(n)}, 0.0);
        const double r = regression::pnml_predict(fit, x).regret;
        EXPECT_LE(r, previous);
        previous = r;
    }
}

TEST(Regression, SpectrumTermsSumToQuadraticForm) {
    std::mt19937_64 rng(17);
    for (double lambda : {0.0, 0.3}) {
        const auto fit = regression::RegressionFit::fit(make_data(9, 5, rng), lambda);
        const Vector x = oracle::gaussian_vector(5, rng);
        const auto s = regression::regret_spectrum(fit, x);
        double sum = 0.0;
        for (double t : s.terms) sum += t;
        EXPECT_EQ(s.terms.size(), 5u);
        EXPECT_EQ(s.singular_values.size(), 5u);
        EXPECT_NEAR(sum, fit.quadratic_form(x), 1e-10);
        EXPECT_NEAR(s.regret, regression::pnml_predict(fit, x).regret, 1e-10);
    }
}

TEST(Regression, RidgeHandlesWideDesign) {
    std::mt19937_64 rng(18);
    const auto data = make_data(3, 7, rng);
    EXPECT_THROW(regression::RegressionFit::fit(data, 0.0), SingularSystemError);
    const auto fit = regression::RegressionFit::fit(data, 1.0);
    EXPECT_GT(regression::pnml_predict(fit, oracle::gaussian_vector(7, rng)).regret, 0.0);
}

TEST(Regression, ValidatesInputs) {
    std::mt19937_64 rng(19);
    const auto data = make_data(5, 2, rng);
    EXPECT_THROW(regression::RegressionFit::fit(data, -1.0), InputError);
    EXPECT_THROW(regression::RegressionFit::fit(data, 0.1, 0.0), InputError);
    const auto fit = regression::RegressionFit::fit(data, 0.1);
    EXPECT_THROW(regression::pnml_predict(fit, Vector::Zero(3)), InputError);
    LabeledDataset bad = data;
    bad.targets(0) = std::nan("");
    EXPECT_THROW(regression::RegressionFit::fit(bad, 0.1), InputError);
}

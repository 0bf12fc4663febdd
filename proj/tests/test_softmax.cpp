#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pnml/data.hpp"
#include "pnml/error.hpp"
#include "pnml/linalg.hpp"
#include "pnml/metrics.hpp"
#include "pnml/softmax.hpp"

using namespace pnml;

namespace {



double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST(Softmax, GenieClosedFormMatchesUpdateRule) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = oracle::uniform_int(1, 10, rng);
        const int c = oracle::uniform_int(2, 5, rng);
        const int n = oracle::uniform_int(1, 14, rng);
        const Matrix x_train = oracle::gaussian_matrix(n, d, rng);
        const Matrix theta = 0.5 * oracle::gaussian_matrix(d, c, rng);
        const Vector x = oracle::gaussian_vector(d, rng);
        const softmax::EmbeddingSet set(x_train, false);
        const auto g = softmax::g_vector(set, x);
        const Vector g_ref = oracle::softmax_g(x_train, x);
        EXPECT_NEAR(g.xg, x.dot(g_ref), 1e-8);
        const Vector p = oracle::softmax(theta.transpose() * x);
        for (int i = 0; i < c; ++i) {
            EXPECT_NEAR(softmax::genie_probability(p(i), g.xg), oracle::update_rule_genie(theta, g_ref, x, i), 1e-8);
        }
    }
}

TEST(Softmax, TwoClassHandValue) {
    Vector p(2);
    p << 0.55, 0.45;
    const auto q = softmax::analytic_regret(p, 1.0);
    EXPECT_NEAR(q.regret, std::log(1.0 / 1.45 + 1.0 / 1.55), 1e-12);
    EXPECT_NEAR(q.regret, 0.288794, 1e-6);
    EXPECT_NEAR(q.probabilities.sum(), 1.0, 1e-12);
}

TEST(Softmax, ZeroProjectionGivesZeroRegret) {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector p = oracle::random_simplex(oracle::uniform_int(2, 6, rng), rng);
        const auto q = softmax::analytic_regret(p, 0.0);
        EXPECT_EQ(q.regret, 0.0);
        EXPECT_LE((q.probabilities - p).norm(), 1e-15);
    }
}

TEST(Softmax, RegretMonotoneInProjection) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector p = oracle::random_simplex(oracle::uniform_int(2, 6, rng), rng);
        double previous = -1.0;
        for (int k = 0; k < 100; ++k) {
            const double r = softmax::analytic_regret(p, k / 100.0).regret;
            EXPECT_GE(r, previous);
            EXPECT_GE(r, 0.0);
            previous = r;
        }
    }
}

TEST(Softmax, ConfidentPredictionRespondsSteeplyNearOne) {
    Vector sure(2), unsure(2);
    sure << 0.99, 0.01;
    unsure << 0.55, 0.45;
    auto slope = [](const Vector& p) {
        return softmax::analytic_regret(p, 1.0).regret - softmax::analytic_regret(p, 0.9).regret;
    };
    EXPECT_GT(slope(sure), slope(unsure));
}

TEST(Softmax, ClippingKeepsDegenerateProbabilitiesFinite) {
    Vector p(3);
    p << 1.0, 0.0, 0.0;
    for (double a : {0.0, 0.5, 1.0}) {
        const auto q = softmax::analytic_regret(p, a);
        EXPECT_TRUE(std::isfinite(q.regret));
        EXPECT_NEAR(q.probabilities.sum(), 1.0, 1e-10);
    }
    EXPECT_THROW(softmax::analytic_regret(p, 1.5), InputError);
    Vector bad(2);
    bad << 0.7, 0.7;
    EXPECT_THROW(softmax::analytic_regret(bad, 0.5), InputError);
}

TEST(Softmax, ProjectionOfTrainingRowAndOrthogonalVector) {
    std::mt19937_64 rng(54);
    const Matrix x_train = oracle::gaussian_matrix(3, 6, rng);
    const softmax::EmbeddingSet set(x_train, false);
    // training row of a full-row-rank set: s = xᵀX⁺X⁺ᵀx
    const Vector row = x_train.row(1).transpose();
    const Matrix p = oracle::pinv(x_train);
    const double s = (p.transpose() * row).squaredNorm();
    const auto g = softmax::g_vector(set, row);
    EXPECT_TRUE(g.in_span);
    EXPECT_NEAR(g.xg, s / (1 + s), 1e-10);
    // orthogonal to every training row
    const Vector ortho = linalg::orthogonal_residual(x_train, oracle::gaussian_vector(6, rng));
    EXPECT_NEAR(softmax::g_vector(set, ortho).xg, 1.0, 1e-12);
}

TEST(Softmax, ProjectionShrinksWithMoreAlignedData) {
    std::mt19937_64 rng(55);
    const Matrix big = oracle::gaussian_matrix(400, 4, rng);
    const Vector x = oracle::gaussian_vector(4, rng);
    double previous = 2.0;
    for (int n : {10, 50, 400}) {
        const double xg = softmax::g_vector(softmax::EmbeddingSet(big.topRows(n), false), x).xg;
        EXPECT_LT(xg, previous);
        previous = xg;
    }
    EXPECT_LT(previous, 0.05);
}

TEST(Softmax, ScalingTestVectorRaisesRegretInSpan) {
    std::mt19937_64 rng(56);
    const softmax::EmbeddingSet set(oracle::gaussian_matrix(20, 3, rng), false);
    const Vector x = oracle::gaussian_vector(3, rng);
    Vector p(3);
    p << 0.7, 0.2, 0.1;
    double previous = -1.0;
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const auto g = softmax::g_vector(set, alpha * x);
        ASSERT_TRUE(g.in_span);
        const double r = softmax::analytic_regret(p, g.xg).regret;
        EXPECT_GE(r, previous);
        previous = r;
    }
}

TEST(Softmax, EmbeddingsAreNormalized) {
    std::mt19937_64 rng(57);
    const softmax::EmbeddingSet set(3.0 * oracle::gaussian_matrix(10, 4, rng));
    for (Eigen::Index i = 0; i < set.size(); ++i) EXPECT_NEAR(set.features().row(i).norm(), 1.0, 1e-12);
    EXPECT_NEAR(set.prepare(Vector::Constant(4, 7.0)).norm(), 1.0, 1e-12);
    EXPECT_THROW(set.prepare(Vector::Zero(4)), InputError);
}

TEST(Softmax, HeadOutputsSumToOneAndTrainingLowersLoss) {
    std::mt19937_64 rng(58);
    const Matrix x = oracle::gaussian_matrix(30, 4, rng);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) y[i] = x(i, 0) > 0 ? 1 : (x(i, 1) > 0 ? 2 : 0);
    auto head = softmax::SoftmaxHead::zeros(4, 3);
    const double before = head.loss(x, y);
    const auto history = head.train(x, y, {0.5, 200, 3});
    EXPECT_LT(history.back(), before);
    const Matrix probs = head.probabilities(x);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) EXPECT_NEAR(probs.row(i).sum(), 1.0, 1e-12);
}

TEST(Softmax, DivergentTrainingRaises) {
    std::mt19937_64 rng(59);
    const Matrix x = 50.0 * oracle::gaussian_matrix(20, 3, rng);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) y[i] = i % 2;
    auto head = softmax::SoftmaxHead::zeros(3, 2);
    EXPECT_THROW(head.train(x, y, {100.0, 200, 3}), NumericalError);
}

TEST(Softmax, OodScoreOfTrainingPointIsSmall) {
    std::mt19937_64 rng(60);
    Matrix x(300, 5);
    std::vector<int> y(300);
    for (int i = 0; i < 300; ++i) {
        y[i] = i % 2;
        x.row(i) = oracle::gaussian_vector(5, rng).transpose() * 0.3;
        x(i, 0) += y[i] ? 2.0 : -2.0;
    }
    const softmax::EmbeddingSet set(x, false);
    const auto head = softmax::fit_erm(set, y, 2);
    const auto s = softmax::ood_score(set, head, x.row(0).transpose());
    EXPECT_LT(s.regret, 0.05);
}

TEST(Softmax, OrthogonalUniformScoreMatchesFormula) {
    std::mt19937_64 rng(61);
    Matrix x = Matrix::Zero(10, 4);
    x.leftCols(2) = oracle::gaussian_matrix(10, 2, rng);
    const softmax::EmbeddingSet set(x, false);
    const auto head = softmax::SoftmaxHead::zeros(4, 3);
    Vector t = Vector::Zero(4);
    t(3) = 1.0;
    const auto s = softmax::ood_score(set, head, t);
    EXPECT_NEAR(s.xg, 1.0, 1e-12);
    EXPECT_NEAR(s.regret, std::log(3.0 / (2.0 - 1.0 / 3.0)), 1e-12);
}

TEST(Softmax, OodSeparationOnSubspaceClusters) {
    std::mt19937_64 rng(62);
    const auto sc = data::make_subspace_embeddings({}, rng);
    const softmax::EmbeddingSet set(sc.train);
    const auto head = softmax::fit_erm(set, sc.train_labels, sc.num_classes);
    std::vector<double> ind, ood;
    for (Eigen::Index i = 0; i < sc.ind_test.rows(); ++i) {
        ind.push_back(softmax::ood_score(set, head, sc.ind_test.row(i).transpose()).regret);
        ood.push_back(softmax::ood_score(set, head, sc.ood_test.row(i).transpose()).regret);
    }
    EXPECT_GE(metrics::auroc(ood, ind), 0.95);
}

TEST(Softmax, IrisStyleCornersHaveHigherRegret) {
    std::mt19937_64 rng(63);
    Matrix x(90, 2);
    std::vector<int> y(90);
    const double cx[3] = {-0.5, 0.5, 0.0}, cy[3] = {-0.3, -0.3, 0.5};
    for (int i = 0; i < 90; ++i) {
        y[i] = i % 3;
        x(i, 0) = cx[y[i]] + 0.15 * oracle::gaussian_vector(1, rng)(0);
        x(i, 1) = cy[y[i]] + 0.15 * oracle::gaussian_vector(1, rng)(0);
    }
    const softmax::EmbeddingSet set(x, false);
    const auto head = softmax::fit_erm(set, y, 3);
    double train_mean = 0.0;
    for (int i = 0; i < 90; ++i) train_mean += softmax::ood_score(set, head, x.row(i).transpose()).regret / 90.0;
    double corner_mean = 0.0;
    for (double a : {-3.0, 3.0}) {
        for (double b : {-3.0, 3.0}) corner_mean += softmax::ood_score(set, head, Vector{{a, b}}).regret / 4.0;
    }
    EXPECT_LT(train_mean, corner_mean);
}

TEST(Softmax, TrainedPnmlConcentratesOnDuplicatedLabel) {
    std::mt19937_64 rng(64);
    Matrix x(40, 3);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) {
        y[i] = i % 2;
        x.row(i) = 0.2 * oracle::gaussian_vector(3, rng).transpose();
        x(i, 0) += y[i] ? 1.0 : -1.0;
    }
    const softmax::EmbeddingSet set(x, false);
    const auto head = softmax::fit_erm(set, y, 2, {0.5, 500, 0});
    const auto q = softmax::trained_pnml(set, y, head, x.row(3).transpose());
    EXPECT_EQ(q.argmax(), y[3]);
    EXPECT_GT(q.probabilities(y[3]), 0.9);
    EXPECT_LT(q.regret, 0.1);
    EXPECT_NEAR(q.probabilities.sum(), 1.0, 1e-12);
}

TEST(Softmax, TrainedAndAnalyticRegretsAgreeInOrdering) {
    std::mt19937_64 rng(65);
    Matrix x(30, 3);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) {
        y[i] = i % 2;
        x.row(i) = 0.3 * oracle::gaussian_vector(3, rng).transpose();
        x(i, 0) += y[i] ? 1.0 : -1.0;
        x(i, 2) = 0.0;  // training data lives in the first two axes
    }
    const softmax::EmbeddingSet set(x, false);
    const auto head = softmax::fit_erm(set, y, 2, {0.5, 500, 0});
    // In-span probes: off the span xg saturates at 1 and the two regrets
    // are driven by different quantities.
    std::vector<double> analytic, trained;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const Vector probe{{-2.0 + i, -2.0 + j, 0.0}};
            analytic.push_back(softmax::ood_score(set, head, probe).regret);
            trained.push_back(softmax::trained_pnml(set, y, head, probe, {0.5, 50, 0}).regret);
        }
    }
    EXPECT_GT(spearman(analytic, trained), 0.9);
}

TEST(Softmax, TwiceUniversalCombiner) {
    Vector a(3), b(3);
    a << 1.0 / 3, 1.0 / 3, 1.0 / 3;
    b << 0.9, 0.05, 0.05;
    const CategoricalPredictive qa{a, 0.0}, qb{b, 0.0};
    const auto single = softmax::twice_universal({qa});
    EXPECT_LE((single.probabilities - a).norm(), 1e-15);
    EXPECT_NEAR(single.regret, 0.0, 1e-15);
    const auto both = softmax::twice_universal({qa, qb});
    const double total = 0.9 + 1.0 / 3 + 1.0 / 3;
    EXPECT_NEAR(both.regret, std::log(total), 1e-12);
    EXPECT_NEAR(both.probabilities(0), 0.9 / total, 1e-12);
    EXPECT_EQ(both.argmax(), 0);
    for (int i = 0; i < 3; ++i) EXPECT_GE(both.probabilities(i) * total, std::max(a(i), b(i)) - 1e-15);
    EXPECT_THROW(softmax::twice_universal({}), InputError);
}

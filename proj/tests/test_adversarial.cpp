#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pnml/adversarial.hpp"
#include "pnml/error.hpp"

using namespace pnml;
using namespace pnml::adversarial;

namespace {

double relative_error(const Vector& a, const Vector& b) {
    return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST(Adversarial, WeightGradientsMatchFiniteDifferences) {
    ToyMlp net({2, 8, 8, 3}, 7);
    std::mt19937_64 rng(71);
    const Matrix x = oracle::gaussian_matrix(5, 2, rng);
    const std::vector<int> y{0, 1, 2, 1, 0};
    const auto g = net.backward(x, y);
    const Vector analytic = ToyMlp::flatten(g.weights, g.biases);
    const Vector theta = net.parameters();
    Vector numeric(theta.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Vector t = theta;
        t(i) += h;
        net.set_parameters(t);
        const double up = net.losses(x, y).sum();
        t(i) -= 2 * h;
        net.set_parameters(t);
        const double down = net.losses(x, y).sum();
        numeric(i) = (up - down) / (2 * h);
    }
    net.set_parameters(theta);
    EXPECT_LE(relative_error(analytic, numeric), 1e-4);
}

TEST(Adversarial, InputGradientsMatchFiniteDifferences) {
    const ToyMlp net({2, 16, 16, 2}, 3);
    std::mt19937_64 rng(72);
    const Matrix x = oracle::gaussian_matrix(6, 2, rng);
    const std::vector<int> y{0, 1, 1, 0, 1, 0};
    const auto [losses, grad] = net.input_gradient(x, y);
    EXPECT_LE((losses - net.losses(x, y)).norm(), 1e-12);
    EXPECT_LE((grad - net.backward(x, y).input).norm(), 1e-12);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            Matrix up = x, down = x;
            up(i, j) += h;
            down(i, j) -= h;
            const double numeric = (net.losses(up, y)(i) - net.losses(down, y)(i)) / (2 * h);
            EXPECT_NEAR(grad(i, j), numeric, 1e-4 * std::max(1.0, std::abs(numeric)));
        }
    }
}

TEST(Adversarial, SignedStepMapsZeroToZero) {
    Matrix g(1, 4);
    g << -2.0, 0.0, 3.0, -0.0;
    Matrix expected(1, 4);
    expected << -1.0, 0.0, 1.0, 0.0;
    EXPECT_EQ(signed_step(g), expected);
}

TEST(Adversarial, FgsmMovesEveryCoordinateByEpsilon) {
    const ToyMlp net({2, 8, 2}, 5);
    std::mt19937_64 rng(73);
    const Matrix x = oracle::gaussian_matrix(10, 2, rng);
    const std::vector<int> y(10, 1);
    const Matrix adv = fgsm(net, x, y, 0.3);
    const Matrix g = net.backward(x, y).input;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            if (g(i, j) != 0.0) EXPECT_NEAR(std::abs(adv(i, j) - x(i, j)), 0.3, 1e-15);
        }
    }
    EXPECT_GE(net.losses(adv, y).sum(), net.losses(x, y).sum());
}

TEST(Adversarial, PgdStaysInsideTheBall) {
    const ToyMlp net({2, 16, 2}, 9);
    std::mt19937_64 rng(74);
    const Matrix x = oracle::gaussian_matrix(20, 2, rng);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) y[i] = i % 2;
    AttackConfig cfg;
    cfg.epsilon = 0.4;
    cfg.step = 0.3;
    cfg.iterations = 7;
    cfg.restarts = 3;
    const Matrix adv = pgd(net, x, y, cfg);
    EXPECT_LE((adv - x).cwiseAbs().maxCoeff(), 0.4 + 1e-12);
    cfg.clip = std::make_pair(-0.5, 0.5);
    EXPECT_LE(pgd(net, x, y, cfg).cwiseAbs().maxCoeff(), 0.5 + 1e-12);
}

TEST(Adversarial, ZeroRefinementEqualsBaseModel) {
    const ToyMlp net({2, 16, 16, 2}, 11);
    std::mt19937_64 rng(75);
    const Matrix x = oracle::gaussian_matrix(30, 2, rng);
    const auto out = adversarial_pnml_predict(net, x, {0.0, 1});
    EXPECT_EQ(out.probabilities, net.probabilities(x));
    EXPECT_EQ(out.predictions, net.predict(x));
    for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_NEAR(out.regrets(i), 0.0, 1e-15);
}

TEST(Adversarial, DefenseNormalizesRefinedProbabilities) {
    const ToyMlp net({2, 16, 3}, 13);
    std::mt19937_64 rng(76);
    const Matrix x = oracle::gaussian_matrix(8, 2, rng);
    const RefineConfig cfg{0.4, 1};
    const auto out = adversarial_pnml_predict(net, x, cfg);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Vector genie(3);
        for (int c = 0; c < 3; ++c) {
            const Matrix refined = refine(net, x.row(i), {c}, cfg);
            genie(c) = net.probabilities(Vector(refined.row(0).transpose()))(c);
        }
        EXPECT_NEAR(out.regrets(i), std::log(genie.sum()), 1e-12);
        EXPECT_LE((out.probabilities.row(i).transpose() - genie / genie.sum()).norm(), 1e-12);
    }
    const auto single = adversarial_pnml_predict(net, Vector(x.row(0).transpose()), cfg);
    EXPECT_NEAR(single.regret, out.regrets(0), 1e-15);
}

TEST(Adversarial, RefinementMovesTowardTheLabel) {
    const ToyMlp net({2, 16, 2}, 17);
    std::mt19937_64 rng(77);
    const Matrix x = oracle::gaussian_matrix(10, 2, rng);
    const std::vector<int> y(10, 0);
    const Matrix refined = refine(net, x, y, {0.2, 1});
    EXPECT_LE((refined - x).cwiseAbs().maxCoeff(), 0.2 + 1e-15);
    EXPECT_LE(net.losses(refined, y).sum(), net.losses(x, y).sum());
}

TEST(Adversarial, DefenseObjectiveUsesIdentityJacobian) {
    const ToyMlp net({2, 8, 3}, 19);
    std::mt19937_64 rng(78);
    const Matrix x = oracle::gaussian_matrix(4, 2, rng);
    const std::vector<int> y{0, 2, 1, 1};
    const RefineConfig cfg{0.3, 1};
    const auto [loss, grad] = defense_objective(net, cfg)(x, y);
    const auto out = adversarial_pnml_predict(net, x, cfg);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        EXPECT_NEAR(loss(i), -std::log(out.probabilities(i, y[i])), 1e-12);
        Vector expected = Vector::Zero(2);
        Vector g_y;
        for (int c = 0; c < 3; ++c) {
            const Matrix refined = refine(net, x.row(i), {c}, cfg);
            const Vector gc = net.backward(refined, {c}).input.row(0).transpose();
            expected -= out.probabilities(i, c) * gc;
            if (c == y[i]) g_y = gc;
        }
        expected += g_y;
        EXPECT_LE((grad.row(i).transpose() - expected).norm(), 1e-12);
    }
}

TEST(Adversarial, RingDatasetGeometry) {
    std::mt19937_64 rng(79);
    const auto d = make_ring_dataset(200, rng);
    ASSERT_EQ(d.size(), 400);
    double r0 = 0.0, r1 = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) (d.labels[i] ? r1 : r0) += d.features.row(i).norm() / 200.0;
    EXPECT_LT(r0, 0.2);
    EXPECT_NEAR(r1, 2.0, 0.1);
}

TEST(Adversarial, TrainingFitsTheRing) {
    std::mt19937_64 rng(80);
    const auto d = make_ring_dataset(100, rng);
    ToyMlp net({2, 32, 32, 2}, 1);
    TrainConfig cfg;
    cfg.epochs = 150;
    const auto history = train(net, d, cfg);
    EXPECT_LT(history.back(), history.front());
    EXPECT_GE(accuracy(net.predict(d.features), d.labels), 0.95);
}

TEST(Adversarial, ValidatesShapes) {
    EXPECT_THROW(ToyMlp({2}, 1), InputError);
    const ToyMlp net({2, 4, 2}, 1);
    EXPECT_THROW(net.logits(Matrix::Zero(1, 3)), InputError);
    EXPECT_THROW(net.losses(Matrix::Zero(2, 2), {0}), InputError);
    EXPECT_THROW(net.losses(Matrix::Zero(1, 2), {5}), InputError);
}

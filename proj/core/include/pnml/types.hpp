#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace pnml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Design matrix (one sample per row) and real-valued targets.
struct LabeledDataset {
    Matrix features;
    Vector targets;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dimension() const { return features.cols(); }
};

// Design matrix with integer class labels in [0, num_classes).
struct ClassificationDataset {
    Matrix features;
    std::vector<int> labels;
    int num_classes = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dimension() const { return features.cols(); }
};

// Gaussian predictive distribution together with its learnability measure.
struct GaussianPredictive {
    double mean = 0.0;
    double variance = 1.0;
    double regret = 0.0;

    double log_density(double y) const {
        const double r = y - mean;
        return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * r * r / variance;
    }
    double density(double y) const { return std::exp(log_density(y)); }
};

// Normalized class probabilities and the log-normalizer of the genie values.
struct CategoricalPredictive {
    Vector probabilities;
    double regret = 0.0;

    int argmax() const {
        Eigen::Index best = 0;
        probabilities.maxCoeff(&best);
        return static_cast<int>(best);
    }
};

}  // namespace pnml

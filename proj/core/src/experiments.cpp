#include "pnml/experiments.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pnml/error.hpp"
#include "pnml/overparam.hpp"
#include "pnml/parallel.hpp"

namespace pnml::experiments {

CurveProblem make_cosine_problem(int train_size, int test_size, double noise_sd, std::mt19937_64& rng) {
    if (train_size < 1 || test_size < 1 || !(noise_sd >= 0.0)) throw InputError("invalid curve problem options");
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto draw = [&](int n, Vector& t, Vector& y) {
        t.resize(n);
        y.resize(n);
        for (int i = 0; i < n; ++i) {
            t(i) = uniform(rng);
            y(i) = std::sin(std::numbers::pi * t(i)) + noise_sd * noise(rng);
        }
    };
    CurveProblem p;
    draw(train_size, p.t_train, p.y_train);
    draw(test_size, p.t_test, p.y_test);
    return p;
}

std::vector<DoubleDescentRow> double_descent(const CurveProblem& problem, const std::vector<int>& model_sizes,
                                             double noise_variance, data::FeatureKind kind) {
    if (kind == data::FeatureKind::Identity) throw InputError("double descent needs a polynomial or cosine map");
    if (!(noise_variance > 0.0)) throw InputError("noise variance must be positive");
    if (problem.t_train.size() != problem.y_train.size() || problem.t_test.size() != problem.y_test.size() ||
        problem.t_test.size() < 1 || problem.t_train.size() < 1) {
        throw InputError("train/test inputs and targets must be nonempty and aligned");
    }
    const Eigen::Index n = problem.t_train.size();
    std::vector<DoubleDescentRow> rows;
    for (int m : model_sizes) {
        if (m < 1) throw InputError("model sizes must be >= 1, got " + std::to_string(m));
        LabeledDataset train{data::feature_map(problem.t_train, kind, m - 1), problem.y_train};
        const Matrix test = data::feature_map(problem.t_test, kind, m - 1);
        const auto mn = overparam::MinNormFit::fit(train, noise_variance);
        const Eigen::Index k = test.rows();
        Vector loss(k), regret(k), bound(k);

        // full column rank: the minimum-norm fit is least squares, and s = xᵀ(XᵀX)⁻¹x is taken from
        // the SVD since XᵀX is too ill-conditioned to factor near M = N
        if (mn.spectrum().rank == m) {
            for (Eigen::Index i = 0; i < k; ++i) {
                const Vector x = test.row(i).transpose();
                const double s = mn.pinv_quadratic_form(x);
                const GaussianPredictive q{mn.predict(x), noise_variance * (1.0 + s) * (1.0 + s), std::log1p(s)};
                loss(i) = -q.log_density(problem.y_test(i));
                regret(i) = q.regret;
                bound(i) = overparam::regret_upper_bound(mn, x);
            }
        } else {
            parallel_for(static_cast<std::size_t>(k), [&](std::size_t ii) {
                const auto i = static_cast<Eigen::Index>(ii);
                const Vector x = test.row(i).transpose();
                const overparam::EmpiricalRegret r = overparam::empirical_regret(mn, x);
                regret(i) = r.regret;
                bound(i) = overparam::regret_upper_bound(mn, x);
                if (r.in_span) {
                    GaussianPredictive q{mn.predict(x), noise_variance * std::exp(2.0 * r.regret), r.regret};
                    loss(i) = -q.log_density(problem.y_test(i));
                } else {
                    const overparam::GenieSolver solver(mn, x);
                    const double density = solver.solve(problem.y_test(i)).density;
                    loss(i) = r.regret - std::log(density);
                }
            });
        }
        rows.push_back({m, static_cast<double>(m) / static_cast<double>(n), loss.mean(), regret.mean(), bound.mean()});
    }
    return rows;
}

std::vector<ThresholdRow> regret_threshold_eval(const std::vector<double>& regrets, const std::vector<double>& losses,
                                                const std::vector<double>& thresholds) {
    if (regrets.size() != losses.size()) throw InputError("regrets and losses must be aligned");
    if (regrets.empty()) throw InputError("no samples to evaluate");
    std::vector<ThresholdRow> rows;
    for (double t : thresholds) {
        if (std::isnan(t)) throw InputError("threshold is NaN");
        ThresholdRow row;
        row.threshold = t;
        double total = 0.0;
        for (std::size_t i = 0; i < regrets.size(); ++i) {
            if (regrets[i] <= t) {
                ++row.retained;
                total += losses[i];
            }
        }
        row.retained_fraction = static_cast<double>(row.retained) / static_cast<double>(regrets.size());
        row.empty = row.retained == 0;
        if (!row.empty) row.mean_loss = total / row.retained;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace pnml::experiments

#include "pnml/dial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pnml/error.hpp"
#include "pnml/parallel.hpp"
#include "pnml/softmax.hpp"

namespace pnml::dial {

PredictorEnsemble::PredictorEnsemble(std::vector<Member> members, int num_classes)
    : members_(std::move(members)), num_classes_(num_classes) {
    if (members_.empty()) throw InputError("ensemble needs at least one member");
    if (num_classes_ < 1) throw InputError("ensemble needs at least one class");
}

Vector PredictorEnsemble::predict(int member, const Vector& x) const {
    Vector p = members_.at(static_cast<std::size_t>(member))(x);
    if (p.size() != num_classes_) throw InputError("ensemble member returned the wrong number of classes");
    return p;
}

std::vector<Matrix> PredictorEnsemble::tabulate(const Matrix& points) const {
    std::vector<Matrix> out(members_.size(), Matrix(points.rows(), num_classes_));
    for (int m = 0; m < size(); ++m) {
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            out[m].row(i) = predict(m, points.row(i).transpose()).transpose();
        }
    }
    return out;
}

int map_member(const std::vector<Vector>& test_probs, int y_test, const std::vector<Vector>& cand_probs,
               int y_cand) {
    if (test_probs.empty() || test_probs.size() != cand_probs.size()) {
        throw InputError("member tables must be nonempty and of equal length");
    }
    int best = 0;
    double best_value = -1.0;
    for (std::size_t m = 0; m < test_probs.size(); ++m) {
        const double v = test_probs[m](y_test) * cand_probs[m](y_cand);
        if (v > best_value) {
            best_value = v;
            best = static_cast<int>(m);
        }
    }
    return best;
}

AcquisitionResult dial_select(const std::vector<Matrix>& candidate_tables, const std::vector<Matrix>& test_tables) {
    if (candidate_tables.empty() || candidate_tables.size() != test_tables.size()) {
        throw InputError("candidate and test tables must cover the same nonempty ensemble");
    }
    const std::size_t members = candidate_tables.size();
    const Eigen::Index n_cand = candidate_tables[0].rows();
    const Eigen::Index n_test = test_tables[0].rows();
    const Eigen::Index classes = candidate_tables[0].cols();
    if (n_cand < 1) throw InputError("no candidates to select from");
    if (n_test < 1) throw InputError("test set is empty");
    for (std::size_t m = 0; m < members; ++m) {
        if (candidate_tables[m].rows() != n_cand || test_tables[m].rows() != n_test ||
            candidate_tables[m].cols() != classes || test_tables[m].cols() != classes) {
            throw InputError("member tables disagree in shape");
        }
    }

    AcquisitionResult out;
    out.scores.resize(n_cand, classes);
    parallel_for(static_cast<std::size_t>(n_cand), [&](std::size_t ci) {
        const Eigen::Index i = static_cast<Eigen::Index>(ci);
        for (Eigen::Index yi = 0; yi < classes; ++yi) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < n_test; ++k) {
                double normalizer = 0.0;
                for (Eigen::Index yk = 0; yk < classes; ++yk) {
                    std::size_t best = 0;
                    double best_value = -1.0;
                    for (std::size_t m = 0; m < members; ++m) {
                        const double v = test_tables[m](k, yk) * candidate_tables[m](i, yi);
                        if (v > best_value) {
                            best_value = v;
                            best = m;
                        }
                    }
                    normalizer += test_tables[best](k, yk);
                }
                s += std::log(normalizer);
            }
            out.scores(i, yi) = s;
        }
    });

    out.worst_case = out.scores.rowwise().maxCoeff();
    out.chosen = 0;
    for (Eigen::Index i = 1; i < n_cand; ++i) {
        if (out.worst_case(i) < out.worst_case(out.chosen)) out.chosen = static_cast<int>(i);
    }
    return out;
}

AcquisitionResult dial_select(const PredictorEnsemble& ensemble, const Matrix& candidates, const Matrix& testset) {
    if (candidates.rows() < 1) throw InputError("no candidates to select from");
    if (testset.rows() < 1) throw InputError("test set is empty");
    return dial_select(ensemble.tabulate(candidates), ensemble.tabulate(testset));
}

namespace {

std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (k >= n) return idx;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Matrix gather_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

double ensemble_accuracy(const PredictorEnsemble& ensemble, const ClassificationDataset& test) {
    if (test.size() == 0) return 0.0;
    const std::vector<Matrix> tables = ensemble.tabulate(test.features);
    Matrix mean = Matrix::Zero(test.size(), ensemble.num_classes());
    for (const Matrix& t : tables) mean += t;
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        Eigen::Index best = 0;
        mean.row(i).maxCoeff(&best);
        hits += static_cast<int>(best) == test.labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace

std::vector<CurvePoint> acquisition_loop(const ActiveLearningProblem& problem, const EnsembleBuilder& builder,
                                         const LoopOptions& options) {
    if (options.budget < 0) throw InputError("budget must be >= 0");
    if (static_cast<Eigen::Index>(problem.pool_labels.size()) != problem.pool.rows()) {
        throw InputError("pool labels do not match the pool");
    }
    if (options.budget > problem.pool.rows()) throw InputError("budget exceeds the pool size");
    if (problem.testset.size() < 1) throw InputError("test set is empty");

    std::mt19937_64 rng(options.seed);
    ClassificationDataset labeled = problem.labeled;
    std::vector<Eigen::Index> remaining(problem.pool.rows());
    std::iota(remaining.begin(), remaining.end(), 0);

    std::vector<CurvePoint> curve;
    int ood_picks = 0;
    PredictorEnsemble ensemble = builder(labeled, rng);
    curve.push_back({static_cast<int>(labeled.size()), 0, ensemble_accuracy(ensemble, problem.testset), 0.0});

    for (int step = 0; step < options.budget; ++step) {
        Eigen::Index pick = 0;  // position in `remaining`
        if (options.strategy == Strategy::Random) {
            std::uniform_int_distribution<std::size_t> dist(0, remaining.size() - 1);
            pick = static_cast<Eigen::Index>(dist(rng));
        } else {
            const auto cand_pos = sample_without_replacement(static_cast<Eigen::Index>(remaining.size()),
                                                             options.candidate_subsample, rng);
            std::vector<Eigen::Index> cand_rows;
            cand_rows.reserve(cand_pos.size());
            for (Eigen::Index p : cand_pos) cand_rows.push_back(remaining[p]);
            const auto test_rows =
                sample_without_replacement(problem.testset.size(), options.test_subsample, rng);
            const AcquisitionResult r = dial_select(ensemble, gather_rows(problem.pool, cand_rows),
                                                    gather_rows(problem.testset.features, test_rows));
            pick = cand_pos[r.chosen];
        }

        const Eigen::Index row = remaining[pick];
        remaining.erase(remaining.begin() + pick);
        const int label = problem.pool_labels[row];
        if (label < 0) {
            ++ood_picks;
        } else {
            if (label >= labeled.num_classes) throw InputError("pool label out of range");
            labeled.features.conservativeResize(labeled.size() + 1, Eigen::NoChange);
            labeled.features.row(labeled.size() - 1) = problem.pool.row(row);
            labeled.labels.push_back(label);
            ensemble = builder(labeled, rng);
        }
        curve.push_back({static_cast<int>(labeled.size()), step + 1, ensemble_accuracy(ensemble, problem.testset),
                         static_cast<double>(ood_picks) / static_cast<double>(step + 1)});
    }
    return curve;
}

EnsembleBuilder bootstrap_softmax_builder(int members, int epochs, double learning_rate) {
    if (members < 1) throw InputError("ensemble needs at least one member");
    return [members, epochs, learning_rate](const ClassificationDataset& data, std::mt19937_64& rng) {
        if (data.size() < 1) throw InputError("cannot build an ensemble from an empty labeled set");
        const Eigen::Index n = data.size();
        const Eigen::Index d = data.dimension();
        Matrix augmented(n, d + 1);
        augmented << data.features, Vector::Ones(n);

        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        std::vector<Member> out;
        out.reserve(members);
        for (int m = 0; m < members; ++m) {
            Matrix xb(n, d + 1);
            std::vector<int> yb(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Index src = pick(rng);
                xb.row(i) = augmented.row(src);
                yb[i] = data.labels[src];
            }
            softmax::SoftmaxHead head = softmax::SoftmaxHead::zeros(d + 1, data.num_classes);
            head.train(xb, yb, {learning_rate, epochs, 0});
            out.emplace_back([head](const Vector& x) {
                Vector z(x.size() + 1);
                z << x, 1.0;
                return head.probabilities(z);
            });
        }
        return PredictorEnsemble(std::move(out), data.num_classes);
    };
}

ActiveLearningProblem make_two_gaussian_problem(const PoolOptions& options, std::mt19937_64& rng) {
    if (options.initial_per_class < 1 || options.pool_in_distribution < 0 || options.pool_out_of_distribution < 0 ||
        options.test_points < 1) {
        throw InputError("invalid pool options");
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    auto draw_class = [&](int c) {
        Vector x(2);
        x << (c == 0 ? -options.separation : options.separation) + unit(rng), unit(rng);
        return x;
    };

    ActiveLearningProblem p;
    p.labeled.num_classes = 2;
    p.labeled.features.resize(2 * options.initial_per_class, 2);
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < options.initial_per_class; ++i) {
            p.labeled.features.row(c * options.initial_per_class + i) = draw_class(c).transpose();
            p.labeled.labels.push_back(c);
        }
    }

    const int pool_size = options.pool_in_distribution + options.pool_out_of_distribution;
    p.pool.resize(pool_size, 2);
    for (int i = 0; i < options.pool_in_distribution; ++i) {
        const int c = coin(rng) ? 1 : 0;
        p.pool.row(i) = draw_class(c).transpose();
        p.pool_labels.push_back(c);
    }
    // Outliers: broad Gaussian background, rejected if they fall inside the
    // bulk of either class (within 3 standard deviations of a mean).
    for (int i = 0; i < options.pool_out_of_distribution; ++i) {
        Vector x(2);
        do {
            x << options.ood_scale * unit(rng), options.ood_scale * unit(rng);
        } while ((x - Vector::Unit(2, 0) * options.separation).norm() < 3.0 ||
                 (x + Vector::Unit(2, 0) * options.separation).norm() < 3.0);
        p.pool.row(options.pool_in_distribution + i) = x.transpose();
        p.pool_labels.push_back(-1);
    }

    p.testset.num_classes = 2;
    p.testset.features.resize(options.test_points, 2);
    for (int i = 0; i < options.test_points; ++i) {
        const int c = coin(rng) ? 1 : 0;
        p.testset.features.row(i) = draw_class(c).transpose();
        p.testset.labels.push_back(c);
    }
    return p;
}

}  // namespace pnml::dial

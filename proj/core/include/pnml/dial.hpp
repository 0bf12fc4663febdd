#pragma once

// Individual active learning over a frozen ensemble treated as a uniform
// posterior. For candidate i with hypothesized label y_i, every test point k
// and label y_k picks the member maximizing p_m(y_k|x_k)·p_m(y_i|x_i); the
// score S(i, y_i) sums log Σ_{y_k} p_chosen(y_k|x_k) over the test points. The
// selected candidate minimizes max_{y_i} S(i, y_i).

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "pnml/types.hpp"

namespace pnml::dial {

using Member = std::function<Vector(const Vector&)>;

class PredictorEnsemble {
public:
    PredictorEnsemble(std::vector<Member> members, int num_classes);

    int size() const { return static_cast<int>(members_.size()); }
    int num_classes() const { return num_classes_; }
    Vector predict(int member, const Vector& x) const;

    // One n×C probability table per member, rows follow `points`.
    std::vector<Matrix> tabulate(const Matrix& points) const;

private:
    std::vector<Member> members_;
    int num_classes_;
};

// argmax_m p_m(y_test|x_test)·p_m(y_cand|x_cand), lowest index on ties.
// Tables are the per-member outputs for the two points.
int map_member(const std::vector<Vector>& test_probs, int y_test, const std::vector<Vector>& cand_probs,
               int y_cand);

struct AcquisitionResult {
    int chosen = 0;
    Matrix scores;                // S(i, y_i), candidates × classes
    Vector worst_case;            // max_{y_i} S(i, y_i)
};

AcquisitionResult dial_select(const PredictorEnsemble& ensemble, const Matrix& candidates,
                              const Matrix& testset);
// Same criterion on precomputed tables (member → rows × C).
AcquisitionResult dial_select(const std::vector<Matrix>& candidate_tables,
                              const std::vector<Matrix>& test_tables);

enum class Strategy { Dial, Random };

// Labeled data for the learner and the pool; pool labels of −1 mark
// out-of-distribution samples, which are revealed by the oracle and dropped.
struct ActiveLearningProblem {
    ClassificationDataset labeled;
    Matrix pool;
    std::vector<int> pool_labels;
    ClassificationDataset testset;
};

using EnsembleBuilder = std::function<PredictorEnsemble(const ClassificationDataset&, std::mt19937_64&)>;

struct LoopOptions {
    int budget = 50;
    Strategy strategy = Strategy::Dial;
    int candidate_subsample = 512;
    int test_subsample = 128;
    std::uint64_t seed = 42;
};

struct CurvePoint {
    int n_labeled = 0;     // in-distribution labels in the training set
    int n_queried = 0;     // oracle calls so far, OOD included
    double accuracy = 0.0;
    double ood_fraction = 0.0;  // OOD picks / queries so far
};

// select → label → rebuild ensemble, `budget` times. Accuracy is that of the
// ensemble-mean prediction on the labeled test set.
std::vector<CurvePoint> acquisition_loop(const ActiveLearningProblem& problem, const EnsembleBuilder& builder,
                                         const LoopOptions& options);

// `members` softmax heads with a bias feature, each trained on a bootstrap
// resample of the labeled set.
EnsembleBuilder bootstrap_softmax_builder(int members = 20, int epochs = 500, double learning_rate = 0.1);

struct PoolOptions {
    int initial_per_class = 5;
    int pool_in_distribution = 200;
    int pool_out_of_distribution = 200;
    int test_points = 200;
    double separation = 2.0;      // class means at (±separation, 0)
    double ood_scale = 6.0;       // OOD drawn from N(0, ood_scale²·I) outside the IND bulk
};

// Two unit-variance Gaussian classes in 2D at (±separation, 0), plus broad
// background outliers.
ActiveLearningProblem make_two_gaussian_problem(const PoolOptions& options, std::mt19937_64& rng);

}  // namespace pnml::dial

#pragma once

// Dataset I/O, feature maps, preprocessing, splits and synthetic generators.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pnml/types.hpp"

namespace pnml::data {

// Numeric CSV with a header row.
struct Table {
    std::vector<std::string> columns;
    Matrix values;

    Eigen::Index column_index(const std::string& name) const;  // throws InputError if absent
};

// Every cell must parse as a finite double. Errors name the 1-based file line
// (the header is line 1).
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);
void write_csv(const std::string& path, const Table& table);

// The target column is removed from the features; nullopt selects the last column.
LabeledDataset to_dataset(const Table& table, const std::optional<std::string>& target = std::nullopt);
LabeledDataset load_csv(const std::string& path, const std::optional<std::string>& target = std::nullopt);

// Labels must be nonnegative integers; num_classes is max label + 1.
ClassificationDataset to_classification(const Table& table,
                                        const std::optional<std::string>& target = std::nullopt);

enum class FeatureKind { Identity, Polynomial, Cosine };

// Rows are samples. Polynomial: X[n, m] = t_n^m; cosine: X[n, m] = cos(πm·t_n + πm/2);
// both for m = 0..degree. Identity returns t as a single column.
Matrix feature_map(const Vector& t, FeatureKind kind, int degree);
FeatureKind parse_feature_kind(const std::string& name);

// Per-column zero mean, unit variance, fit on one matrix and applied to others.
// Constant columns keep scale 1.
struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
    Vector apply(const Vector& x) const;
};

struct Split {
    LabeledDataset train;
    LabeledDataset test;
};

// Seeded shuffle; at least one row lands on each side when size ≥ 2.
Split random_split(const LabeledDataset& data, double test_fraction, std::uint64_t seed);

// Rows whose `column` value is ≤ threshold go to train, the rest to test.
std::pair<Table, Table> threshold_split(const Table& table, const std::string& column, double threshold);

Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows);

// Embedding matrices: little-endian "PNML" magic, u32 rows, u32 cols,
// u32 dtype (1 = f64), then row-major doubles. read_embeddings also accepts a
// headered numeric CSV.
void write_embeddings(const std::string& path, const Matrix& embeddings);
Matrix read_embeddings(const std::string& path);

// Linear-Gaussian data with θ ~ N(0, τ²I), τ² = σ²/λ_true, so that the
// posterior mean is the ridge solution at λ_true.
LabeledDataset make_ridge_problem(int samples, int dimension, double lambda_true, double noise_variance,
                                  std::mt19937_64& rng);

// IND embeddings live in the span of the first `span_dimension` axes, OOD
// embeddings in the orthogonal complement, both with a small isotropic jitter.
struct EmbeddingScenario {
    Matrix train;
    std::vector<int> train_labels;
    Matrix ind_test;
    Matrix ood_test;
    int num_classes = 0;
};

struct EmbeddingScenarioOptions {
    int dimension = 16;
    int span_dimension = 8;
    int num_classes = 3;
    int train_per_class = 30;
    int test_points = 100;
    double jitter = 0.05;
};

EmbeddingScenario make_subspace_embeddings(const EmbeddingScenarioOptions& options, std::mt19937_64& rng);

}  // namespace pnml::data

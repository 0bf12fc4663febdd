#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "pnml/data.hpp"
#include "pnml/error.hpp"

using namespace pnml;
using namespace pnml::data;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("pnml_test_" + name)).string();
}

template <typename F>
std::string error_message(F&& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Data, ParsesHeaderAndValues) {
    const auto t = parse_csv("a, b ,c\n1,2,3\n\n4.5,-1e-3,+7\n");
    ASSERT_EQ(t.columns.size(), 3u);
    EXPECT_EQ(t.columns[1], "b");
    ASSERT_EQ(t.values.rows(), 2);
    EXPECT_EQ(t.values(1, 0), 4.5);
    EXPECT_EQ(t.values(1, 1), -1e-3);
    EXPECT_EQ(t.values(1, 2), 7.0);
    EXPECT_EQ(t.column_index("c"), 2);
    EXPECT_THROW(t.column_index("z"), InputError);
}

TEST(Data, CsvRoundTrip) {
    std::mt19937_64 rng(91);
    Table t{{"x", "y", "z"}, oracle::gaussian_matrix(7, 3, rng)};
    const auto path = temp_path("roundtrip.csv");
    write_csv(path, t);
    const auto back = read_csv(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(back.values, t.values);
}

TEST(Data, ErrorsNameTheLine) {
    EXPECT_NE(error_message([] { parse_csv("a,b\n1,2\n3,oops\n"); }).find("line 3"), std::string::npos);
    EXPECT_NE(error_message([] { parse_csv("a,b\n1,2,3\n"); }).find("line 2"), std::string::npos);
    EXPECT_NE(error_message([] { parse_csv("a,b\n1,nan\n"); }).find("line 2"), std::string::npos);
    EXPECT_THROW(parse_csv(""), InputError);
    EXPECT_THROW(parse_csv("a,b\n"), InputError);
    EXPECT_THROW(read_csv("/nonexistent/file.csv"), InputError);
}

TEST(Data, TargetSelection) {
    const auto t = parse_csv("x1,y,x2\n1,10,2\n3,30,4\n");
    const auto last = to_dataset(t);
    EXPECT_EQ(last.targets, (Vector{{2.0, 4.0}}));
    const auto named = to_dataset(t, "y");
    EXPECT_EQ(named.targets, (Vector{{10.0, 30.0}}));
    EXPECT_EQ(named.features.col(1), (Vector{{2.0, 4.0}}));
    EXPECT_THROW(to_dataset(t, "missing"), InputError);
    EXPECT_THROW(to_dataset(parse_csv("only\n1\n")), InputError);
}

TEST(Data, ClassificationLabels) {
    const auto d = to_classification(parse_csv("f,label\n0.1,0\n0.2,2\n0.3,1\n"));
    EXPECT_EQ(d.num_classes, 3);
    EXPECT_EQ(d.labels, (std::vector<int>{0, 2, 1}));
    EXPECT_THROW(to_classification(parse_csv("f,label\n0.1,0.5\n")), InputError);
    EXPECT_THROW(to_classification(parse_csv("f,label\n0.1,-1\n")), InputError);
}

TEST(Data, FeatureMaps) {
    const Vector t{{0.0, 0.5, -1.0}};
    const Matrix ones = feature_map(t, FeatureKind::Polynomial, 0);
    ASSERT_EQ(ones.cols(), 1);
    EXPECT_EQ(ones, Matrix::Ones(3, 1));
    EXPECT_EQ(feature_map(t, FeatureKind::Cosine, 0), Matrix::Ones(3, 1));

    const Matrix poly = feature_map(t, FeatureKind::Polynomial, 3);
    ASSERT_EQ(poly.rows(), 3);
    ASSERT_EQ(poly.cols(), 4);
    EXPECT_DOUBLE_EQ(poly(1, 3), 0.125);
    EXPECT_DOUBLE_EQ(poly(2, 3), -1.0);

    const Matrix cosine = feature_map(t, FeatureKind::Cosine, 4);
    for (int m = 0; m <= 4; ++m) {
        EXPECT_NEAR(cosine(0, m), std::cos(std::numbers::pi * m / 2.0), 1e-15);
        EXPECT_NEAR(cosine(1, m), std::cos(std::numbers::pi * m * 0.5 + std::numbers::pi * m / 2.0), 1e-15);
    }
    EXPECT_EQ(feature_map(t, FeatureKind::Identity, 5), Matrix(t));
    EXPECT_THROW(feature_map(t, FeatureKind::Polynomial, -1), InputError);
    EXPECT_EQ(parse_feature_kind("poly"), FeatureKind::Polynomial);
    EXPECT_EQ(parse_feature_kind("trigonometric"), FeatureKind::Cosine);
    EXPECT_THROW(parse_feature_kind("spline"), InputError);
}

TEST(Data, StandardizerCentersAndScales) {
    std::mt19937_64 rng(92);
    Matrix x = oracle::gaussian_matrix(50, 3, rng) * 4.0;
    x.col(1).array() += 10.0;
    x.col(2).setConstant(5.0);
    const auto s = Standardizer::fit(x);
    const Matrix z = s.apply(x);
    EXPECT_LE(z.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(std::sqrt(z.col(c).squaredNorm() / 50.0), 1.0, 1e-2);
    EXPECT_EQ(s.scale(2), 1.0);
    EXPECT_LE((s.apply(Vector(x.row(3).transpose())) - z.row(3).transpose()).norm(), 1e-12);
    EXPECT_THROW(s.apply(Matrix(Matrix::Zero(2, 4))), InputError);
}

TEST(Data, RandomSplitPartitionsRows) {
    std::mt19937_64 rng(93);
    const LabeledDataset d{oracle::gaussian_matrix(20, 2, rng), Vector::LinSpaced(20, 0, 19)};
    const auto a = random_split(d, 0.25, 3);
    const auto b = random_split(d, 0.25, 3);
    EXPECT_EQ(a.train.targets, b.train.targets);
    EXPECT_EQ(a.train.size() + a.test.size(), 20);
    EXPECT_EQ(a.test.size(), 5);
    std::vector<double> all(a.train.targets.begin(), a.train.targets.end());
    all.insert(all.end(), a.test.targets.begin(), a.test.targets.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 20; ++i) EXPECT_EQ(all[i], i);
    const auto tiny = random_split({d.features.topRows(2), d.targets.head(2)}, 0.01, 1);
    EXPECT_EQ(tiny.test.size(), 1);
    EXPECT_THROW(random_split(d, 1.0, 1), InputError);
}

TEST(Data, ThresholdSplit) {
    const auto t = parse_csv("t,y\n0.1,1\n0.9,2\n0.5,3\n");
    const auto [train, test] = threshold_split(t, "t", 0.5);
    EXPECT_EQ(train.values.rows(), 2);
    EXPECT_EQ(test.values.rows(), 1);
    EXPECT_EQ(test.values(0, 1), 2.0);
    EXPECT_THROW(threshold_split(t, "t", 5.0), InputError);
}

TEST(Data, EmbeddingBinaryRoundTripAndCsvFallback) {
    std::mt19937_64 rng(94);
    const Matrix e = oracle::gaussian_matrix(5, 4, rng);
    const auto path = temp_path("emb.bin");
    write_embeddings(path, e);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 5 * 4 * 8);
    EXPECT_EQ(read_embeddings(path), e);
    std::filesystem::remove(path);

    const auto csv = temp_path("emb.csv");
    write_csv(csv, Table{{"a", "b", "c", "d"}, e});
    EXPECT_EQ(read_embeddings(csv), e);
    std::filesystem::remove(csv);

    const auto truncated = temp_path("trunc.bin");
    {
        std::ofstream out(truncated, std::ios::binary);
        out.write("PNML", 4);
        const std::uint32_t header[3] = {3, 3, 1};
        out.write(reinterpret_cast<const char*>(header), sizeof(header));
    }
    EXPECT_THROW(read_embeddings(truncated), InputError);
    std::filesystem::remove(truncated);
}

TEST(Data, SubspaceEmbeddingsSeparateSpans) {
    std::mt19937_64 rng(95);
    const EmbeddingScenarioOptions opts;
    const auto s = make_subspace_embeddings(opts, rng);
    EXPECT_EQ(s.train.rows(), opts.num_classes * opts.train_per_class);
    EXPECT_EQ(s.train.cols(), opts.dimension);
    const int k = opts.span_dimension;
    const double ood_in_span = s.ood_test.leftCols(k).rowwise().norm().mean();
    const double ind_off_span = s.ind_test.rightCols(opts.dimension - k).rowwise().norm().mean();
    EXPECT_LT(ood_in_span, 0.3);
    EXPECT_LT(ind_off_span, 0.3);
}

TEST(Data, RidgeProblemShapes) {
    std::mt19937_64 rng(96);
    const auto d = make_ridge_problem(30, 4, 1.0, 0.5, rng);
    EXPECT_EQ(d.size(), 30);
    EXPECT_EQ(d.dimension(), 4);
    EXPECT_THROW(make_ridge_problem(30, 4, 0.0, 0.5, rng), InputError);
}

#include "pnml/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pnml/error.hpp"

namespace pnml::data {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    std::string out = s.substr(b, e - b + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last && std::isfinite(out);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::Index resolve_target(const Table& table, const std::optional<std::string>& target) {
    if (table.columns.size() < 2) throw InputError("need at least one feature column and a target column");
    return target ? table.column_index(*target) : static_cast<Eigen::Index>(table.columns.size()) - 1;
}

Matrix drop_column(const Matrix& m, Eigen::Index col) {
    Matrix out(m.rows(), m.cols() - 1);
    out.leftCols(col) = m.leftCols(col);
    out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
    return out;
}

}  // namespace

Eigen::Index Table::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InputError("column '" + name + "' not found");
    return static_cast<Eigen::Index>(it - columns.begin());
}

Table parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Table t;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (line_no == 0 || trim(line).empty()) throw InputError("CSV is empty");
    t.columns = split_line(line);
    const std::size_t width = t.columns.size();
    for (std::size_t c = 0; c < width; ++c) {
        if (t.columns[c].empty()) throw InputError("line " + std::to_string(line_no) + ": empty column name");
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != width) {
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " fields, got " + std::to_string(cells.size()));
        }
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (!parse_double(cells[c], row[c])) {
                throw InputError("line " + std::to_string(line_no) + ": column '" + t.columns[c] +
                                 "' has non-numeric value '" + cells[c] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("CSV has a header but no data rows");
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) t.values(r, c) = rows[r][c];
    }
    return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path)); }

void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            const auto res = std::to_chars(buf, buf + sizeof buf, table.values(r, c));
            out << (c ? "," : "") << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

LabeledDataset to_dataset(const Table& table, const std::optional<std::string>& target) {
    const Eigen::Index col = resolve_target(table, target);
    LabeledDataset d;
    d.targets = table.values.col(col);
    d.features = drop_column(table.values, col);
    return d;
}

LabeledDataset load_csv(const std::string& path, const std::optional<std::string>& target) {
    return to_dataset(read_csv(path), target);
}

ClassificationDataset to_classification(const Table& table, const std::optional<std::string>& target) {
    const Eigen::Index col = resolve_target(table, target);
    ClassificationDataset d;
    d.features = drop_column(table.values, col);
    d.labels.reserve(table.values.rows());
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        const double v = table.values(r, col);
        if (v < 0 || v != std::floor(v) || v > 1e6) {
            throw InputError("line " + std::to_string(r + 2) + ": label " + std::to_string(v) +
                             " is not a nonnegative integer");
        }
        d.labels.push_back(static_cast<int>(v));
        d.num_classes = std::max(d.num_classes, static_cast<int>(v) + 1);
    }
    return d;
}

Matrix feature_map(const Vector& t, FeatureKind kind, int degree) {
    if (degree < 0) throw InputError("degree must be >= 0");
    if (kind == FeatureKind::Identity) return Matrix(t);
    Matrix x(t.size(), degree + 1);
    for (Eigen::Index n = 0; n < t.size(); ++n) {
        for (int m = 0; m <= degree; ++m) {
            x(n, m) = kind == FeatureKind::Polynomial
                          ? std::pow(t(n), m)
                          : std::cos(std::numbers::pi * m * t(n) + 0.5 * std::numbers::pi * m);
        }
    }
    return x;
}

FeatureKind parse_feature_kind(const std::string& name) {
    if (name == "identity") return FeatureKind::Identity;
    if (name == "polynomial" || name == "poly") return FeatureKind::Polynomial;
    if (name == "cosine" || name == "trigonometric") return FeatureKind::Cosine;
    throw InputError("unknown feature map '" + name + "' (expected identity, polynomial or cosine)");
}

Standardizer Standardizer::fit(const Matrix& x) {
    if (x.rows() < 1) throw InputError("cannot standardize an empty matrix");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale = ((x.rowwise() - s.mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
    for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
        if (!(s.scale(c) > 0.0)) s.scale(c) = 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw InputError("standardizer dimension mismatch");
    return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Vector Standardizer::apply(const Vector& x) const {
    if (x.size() != mean.size()) throw InputError("standardizer dimension mismatch");
    return ((x - mean).array() / scale.array()).matrix();
}

Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Split random_split(const LabeledDataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("test fraction must lie in (0, 1)");
    const Eigen::Index n = data.size();
    if (n < 2) throw InputError("need at least 2 rows to split");
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::Index n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::clamp<Eigen::Index>(n_test, 1, n - 1);
    std::vector<Eigen::Index> test(idx.begin(), idx.begin() + n_test);
    std::vector<Eigen::Index> train(idx.begin() + n_test, idx.end());
    Split s;
    s.train.features = select_rows(data.features, train);
    s.test.features = select_rows(data.features, test);
    s.train.targets.resize(static_cast<Eigen::Index>(train.size()));
    s.test.targets.resize(n_test);
    for (std::size_t i = 0; i < train.size(); ++i) s.train.targets(i) = data.targets(train[i]);
    for (std::size_t i = 0; i < test.size(); ++i) s.test.targets(i) = data.targets(test[i]);
    return s;
}

std::pair<Table, Table> threshold_split(const Table& table, const std::string& column, double threshold) {
    const Eigen::Index col = table.column_index(column);
    std::vector<Eigen::Index> lo, hi;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) (table.values(r, col) <= threshold ? lo : hi).push_back(r);
    if (lo.empty() || hi.empty()) {
        throw InputError("split on '" + column + "' at " + std::to_string(threshold) + " leaves one side empty");
    }
    return {Table{table.columns, select_rows(table.values, lo)}, Table{table.columns, select_rows(table.values, hi)}};
}

namespace {

constexpr char kMagic[4] = {'P', 'N', 'M', 'L'};
constexpr std::uint32_t kDtypeF64 = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
    return v;
}

}  // namespace

void write_embeddings(const std::string& path, const Matrix& embeddings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out.write(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(embeddings.rows()));
    put_u32(out, static_cast<std::uint32_t>(embeddings.cols()));
    put_u32(out, kDtypeF64);
    for (Eigen::Index r = 0; r < embeddings.rows(); ++r) {
        for (Eigen::Index c = 0; c < embeddings.cols(); ++c) {
            std::uint64_t bits;
            const double v = embeddings(r, c);
            std::memcpy(&bits, &v, 8);
            unsigned char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
}

Matrix read_embeddings(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        Table t = parse_csv(bytes);
        return t.values;
    }
    if (bytes.size() < 16) throw InputError(path + ": truncated embedding header");
    const std::uint32_t rows = get_u32(bytes, 4);
    const std::uint32_t cols = get_u32(bytes, 8);
    const std::uint32_t dtype = get_u32(bytes, 12);
    if (dtype != kDtypeF64) throw InputError(path + ": unsupported dtype code " + std::to_string(dtype));
    const std::size_t expected = 16 + 8ull * rows * cols;
    if (bytes.size() != expected) {
        throw InputError(path + ": expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(bytes.size()));
    }
    Matrix m(rows, cols);
    std::size_t at = 16;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c, at += 8) {
            std::uint64_t bits = 0;
            for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(bytes[at + i]);
            double v;
            std::memcpy(&v, &bits, 8);
            if (!std::isfinite(v)) throw InputError(path + ": non-finite value at row " + std::to_string(r));
            m(r, c) = v;
        }
    }
    return m;
}

LabeledDataset make_ridge_problem(int samples, int dimension, double lambda_true, double noise_variance,
                                  std::mt19937_64& rng) {
    if (samples < 1 || dimension < 1 || !(lambda_true > 0.0) || !(noise_variance > 0.0)) {
        throw InputError("invalid ridge problem parameters");
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    const double prior_sd = std::sqrt(noise_variance / lambda_true);
    Vector theta(dimension);
    for (int m = 0; m < dimension; ++m) theta(m) = prior_sd * unit(rng);
    LabeledDataset d;
    d.features.resize(samples, dimension);
    for (int n = 0; n < samples; ++n) {
        for (int m = 0; m < dimension; ++m) d.features(n, m) = unit(rng);
    }
    d.targets = d.features * theta;
    for (int n = 0; n < samples; ++n) d.targets(n) += std::sqrt(noise_variance) * unit(rng);
    return d;
}

EmbeddingScenario make_subspace_embeddings(const EmbeddingScenarioOptions& o, std::mt19937_64& rng) {
    if (o.span_dimension < 1 || o.span_dimension >= o.dimension || o.num_classes < 2 || o.train_per_class < 1 ||
        o.test_points < 1 || !(o.jitter >= 0.0)) {
        throw InputError("invalid embedding scenario options");
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    const int k = o.span_dimension;
    const int d = o.dimension;

    Matrix centers(o.num_classes, d);
    centers.setZero();
    for (int c = 0; c < o.num_classes; ++c) {
        Vector v(k);
        for (int i = 0; i < k; ++i) v(i) = unit(rng);
        centers.row(c).head(k) = v.normalized().transpose();
    }
    auto ind_point = [&](int c) {
        Vector x = centers.row(c).transpose();
        for (int i = 0; i < k; ++i) x(i) += 0.2 * unit(rng);
        for (int i = 0; i < d; ++i) x(i) += o.jitter * unit(rng);
        return x;
    };

    EmbeddingScenario s;
    s.num_classes = o.num_classes;
    s.train.resize(o.num_classes * o.train_per_class, d);
    for (int c = 0; c < o.num_classes; ++c) {
        for (int i = 0; i < o.train_per_class; ++i) {
            s.train.row(c * o.train_per_class + i) = ind_point(c).transpose();
            s.train_labels.push_back(c);
        }
    }
    std::uniform_int_distribution<int> cls(0, o.num_classes - 1);
    s.ind_test.resize(o.test_points, d);
    s.ood_test.resize(o.test_points, d);
    for (int i = 0; i < o.test_points; ++i) {
        s.ind_test.row(i) = ind_point(cls(rng)).transpose();
        Vector x = Vector::Zero(d);
        for (int j = k; j < d; ++j) x(j) = unit(rng);
        x.normalize();
        for (int j = 0; j < d; ++j) x(j) += o.jitter * unit(rng);
        s.ood_test.row(i) = x.transpose();
    }
    return s;
}

}  // namespace pnml::data

#include "pnml/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "pnml/error.hpp"

namespace pnml::linalg {

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite entries");
}

void require_finite(const Vector& v, std::string_view what) {
    if (!v.allFinite()) throw InputError(std::string(what) + " contains non-finite entries");
}

double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double top_singular_value) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
           top_singular_value;
}

Vector SpectralDecomposition::project_row_space(const Vector& x) const {
    const auto basis = feature_basis.leftCols(rank);
    return basis * (basis.transpose() * x);
}

Matrix SpectralDecomposition::reconstruct() const {
    const Eigen::Index n = sample_basis.rows();
    const Eigen::Index m = feature_basis.rows();
    Matrix sigma = Matrix::Zero(n, m);
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) sigma(i, i) = singular_values(i);
    return sample_basis * sigma * feature_basis.transpose();
}

SpectralDecomposition svd(const Matrix& x, std::optional<double> rank_tolerance) {
    if (x.rows() < 1 || x.cols() < 1) throw InputError("design matrix must be at least 1x1");
    require_finite(x, "design matrix");

    Eigen::BDCSVD<Matrix> solver(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SpectralDecomposition out;
    out.sample_basis = solver.matrixU();
    out.feature_basis = solver.matrixV();
    out.singular_values = solver.singularValues();

    const double top = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    out.rank_tolerance = rank_tolerance.value_or(default_rank_tolerance(x.rows(), x.cols(), top));
    out.rank = 0;
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
        if (out.singular_values(i) > out.rank_tolerance) ++out.rank;
    }
    return out;
}

PseudoInverse pinv(const Matrix& x, std::optional<double> rank_tolerance) {
    const SpectralDecomposition s = svd(x, rank_tolerance);
    const Eigen::Index n = x.rows();
    const Eigen::Index m = x.cols();

    PseudoInverse out;
    out.rank = s.rank;

    const bool well_conditioned =
        s.rank > 0 && s.singular_values(0) <= kClosedFormMaxCondition * s.singular_values(s.rank - 1);

    if (s.rank == m && well_conditioned) {
        Eigen::LLT<Matrix> gram(x.transpose() * x);
        if (gram.info() == Eigen::Success) {
            out.matrix = gram.solve(x.transpose());
            out.branch = PinvBranch::FullColumnRank;
            return out;
        }
    }
    if (s.rank == n && well_conditioned) {
        Eigen::LLT<Matrix> gram(x * x.transpose());
        if (gram.info() == Eigen::Success) {
            out.matrix = gram.solve(x).transpose();
            out.branch = PinvBranch::FullRowRank;
            return out;
        }
    }

    out.branch = PinvBranch::GeneralSvd;
    out.matrix = Matrix::Zero(m, n);
    for (Eigen::Index i = 0; i < s.rank; ++i) {
        out.matrix.noalias() +=
            s.feature_basis.col(i) * (s.sample_basis.col(i).transpose() / s.singular_values(i));
    }
    return out;
}

Vector orthogonal_residual(const SpectralDecomposition& spectrum, const Vector& x) {
    if (x.size() != spectrum.feature_basis.rows()) {
        throw InputError("test vector has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(spectrum.feature_basis.rows()));
    }
    return x - spectrum.project_row_space(x);
}

Vector orthogonal_residual(const Matrix& x_train, const Vector& x) {
    if (x.size() != x_train.cols()) {
        throw InputError("test vector has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(x_train.cols()));
    }
    return orthogonal_residual(svd(x_train), x);
}

Matrix normalized_gain(const Matrix& inverse_gram, const Vector& x) {
    if (inverse_gram.rows() != x.size() || inverse_gram.cols() != x.size()) {
        throw InputError("gain matrix and feature vector dimensions disagree");
    }
    const double s = x.dot(inverse_gram * x);
    return inverse_gram / (1.0 + s);
}

Vector rls_update(const Vector& weights, const Matrix& gain, const Vector& x, double residual) {
    if (weights.size() != x.size() || gain.rows() != x.size() || gain.cols() != x.size()) {
        throw InputError("rls_update: dimension mismatch");
    }
    return weights + gain * x * residual;
}

double inverse_quadratic_form(const Eigen::LLT<Matrix>& factor, const Vector& x) {
    const Vector w = factor.matrixL().solve(x);
    return w.squaredNorm();
}

}  // namespace pnml::linalg

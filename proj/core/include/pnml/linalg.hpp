#pragma once

// Dense linear-algebra substrate shared by every learner: SVD with a numerical
// rank, the Moore–Penrose pseudo-inverse, projections onto the orthogonal
// complement of the training row space, and the recursive least-squares step.

#include <optional>
#include <string_view>

#include "pnml/types.hpp"

namespace pnml::linalg {

// Throws InputError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

// max(N, M) · ε · h₁, the usual SVD cutoff.
double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double top_singular_value);

// SVD of an N×M design matrix X written as Xᵀ = U Σ Vᵀ.
//
// feature_basis holds u_1..u_M (M×M, orthonormal columns); the first `rank`
// columns span the row space of X and the rest span its null space.
// sample_basis holds v_1..v_N (N×N). singular_values are sorted descending and
// have length min(N, M).
struct SpectralDecomposition {
    Matrix feature_basis;
    Matrix sample_basis;
    Vector singular_values;
    Eigen::Index rank = 0;
    double rank_tolerance = 0.0;

    // U_r U_rᵀ x, the projection onto the row space of X.
    Vector project_row_space(const Vector& x) const;
    // Rebuilds X from the factors.
    Matrix reconstruct() const;
};

SpectralDecomposition svd(const Matrix& x, std::optional<double> rank_tolerance = std::nullopt);

enum class PinvBranch { FullColumnRank, FullRowRank, GeneralSvd };

struct PseudoInverse {
    Matrix matrix;  // M×N
    PinvBranch branch = PinvBranch::GeneralSvd;
    Eigen::Index rank = 0;
};

// Closed forms (XᵀX)⁻¹Xᵀ or Xᵀ(XXᵀ)⁻¹ when the matching Gram matrix is
// numerically nonsingular, truncated SVD otherwise.
PseudoInverse pinv(const Matrix& x, std::optional<double> rank_tolerance = std::nullopt);

// Largest condition number of X for which the Gram closed forms are used;
// the Gram matrix then has condition number at most its square.
inline constexpr double kClosedFormMaxCondition = 1e6;

// x_⊥ = (I − X⁺X)x, computed from the spectral basis.
Vector orthogonal_residual(const Matrix& x_train, const Vector& x);
Vector orthogonal_residual(const SpectralDecomposition& spectrum, const Vector& x);

// A⁻¹ / (1 + xᵀA⁻¹x), the normalized RLS gain matrix for a symmetric
// positive definite A⁻¹.
Matrix normalized_gain(const Matrix& inverse_gram, const Vector& x);

// θ_N + P·x·residual where P already carries the 1/(1 + xᵀA⁻¹x) factor.
Vector rls_update(const Vector& weights, const Matrix& gain, const Vector& x, double residual);

// ‖L⁻¹x‖² for the Cholesky factor of a symmetric positive definite matrix,
// i.e. xᵀA⁻¹x without forming A⁻¹.
double inverse_quadratic_form(const Eigen::LLT<Matrix>& factor, const Vector& x);

}  // namespace pnml::linalg

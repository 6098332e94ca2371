#pragma once

// Subspaces of a single graded piece H_n, carried by an orthonormal basis in
// the ε_α coordinates.

#include "dalab/core.hpp"

namespace dalab {

class GradedSubspace {
public:
    GradedSubspace() = default;
    /// Throws InvalidInput unless basisᴴ·basis = I to `tolerance` and the row
    /// count equals ambientDim.
    GradedSubspace(int degree, Eigen::Index ambientDim, Matrix basis, double tolerance = 1e-10);

    static GradedSubspace zero(int degree, Eigen::Index ambientDim);
    static GradedSubspace full(int degree, Eigen::Index ambientDim);
    /// Orthonormalized span of arbitrary columns (SVD, relative rank cut).
    static GradedSubspace span(int degree, Eigen::Index ambientDim, const Matrix& columns, double rankThreshold);

    int degree() const { return degree_; }
    Eigen::Index ambientDim() const { return ambient_; }
    Eigen::Index dim() const { return basis_.cols(); }
    const Matrix& basis() const { return basis_; }
    Matrix projector() const { return basis_ * basis_.adjoint(); }

private:
    int degree_ = 0;
    Eigen::Index ambient_ = 0;
    Matrix basis_;
};

/// M ∩ N from principal vectors: directions whose principal cosine is within
/// `threshold` of 1.
GradedSubspace intersect(const GradedSubspace& m, const GradedSubspace& n, double threshold = 1e-8);

/// Orthogonal complement inside H_n.
GradedSubspace orthogonalComplement(const GradedSubspace& m);

/// M ⊖ N for N ⊆ M (numerically): the part of M orthogonal to N.
GradedSubspace relativeComplement(const GradedSubspace& m, const GradedSubspace& n, double rankThreshold = 1e-10);

/// Orthonormalized span of M + N.
GradedSubspace sum(const GradedSubspace& m, const GradedSubspace& n, double rankThreshold = 1e-10);

/// ‖P_M − P_N‖, evaluated as max(‖(I−P_N)Q_M‖, ‖(I−P_M)Q_N‖) to avoid the
/// cancellation in sqrt(1 − cos²).
double subspaceDistance(const GradedSubspace& m, const GradedSubspace& n);

}  // namespace dalab

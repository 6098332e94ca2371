#pragma once

#include "dalab/core.hpp"

#include <Eigen/SparseCore>

namespace dalab {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

namespace linalg {

struct Svd {
    Matrix u;      // thin left singular vectors (empty unless requested)
    RealVector s;  // descending
    Matrix v;      // thin right singular vectors (empty unless requested)
};

/// Thin SVD through LAPACK zgesvd. Throws NumericalFailure if it does not
/// converge.
Svd thinSvd(const Matrix& m, bool wantU, bool wantV);

/// Minimum-norm least-squares solution of m·x = b.
Vector leastSquares(const Matrix& m, const Vector& b, double relThreshold);

/// Singular values in descending order (full SVD; empty for empty input).
RealVector singularValues(const Matrix& m);

/// Largest singular value; 0 for empty input.
double operatorNorm(const Matrix& m);

/// Number of singular values above relThreshold * sv(0).
Eigen::Index numericalRank(const RealVector& sv, double relThreshold);

/// Orthonormal basis of the column span of `columns`, rank decided by
/// relThreshold relative to the largest singular value. The result has
/// columns.rows() rows and rank-many columns.
Matrix orthonormalColumns(const Matrix& columns, double relThreshold);

/// Orthonormal basis of the orthogonal complement of span(q) inside
/// C^ambient; q must have orthonormal columns.
Matrix complementColumns(const Matrix& q, Eigen::Index ambient);

/// Smallest singular value counting the missing ones of a wide matrix as 0
/// (i.e. the smallest singular value of the map on its full domain).
double minSingularValueOnDomain(const Matrix& m);

/// Singular values of a sparse matrix, computed exactly by splitting the
/// row/column incidence graph into connected components and running a dense
/// SVD on each. Zero singular values from empty rows/columns are omitted.
RealVector sparseSingularValues(const SparseMatrix& m);

/// ‖qᴴq − I‖ in the max-entry sense.
double orthonormalityDefect(const Matrix& q);

}  // namespace linalg
}  // namespace dalab

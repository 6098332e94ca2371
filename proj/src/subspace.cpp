#include "dalab/subspace.hpp"

#include "dalab/linalg.hpp"

#include <algorithm>
#include <string>

namespace dalab {

namespace {

void requireCompatible(const GradedSubspace& m, const GradedSubspace& n, const char* what) {
    if (m.degree() != n.degree() || m.ambientDim() != n.ambientDim())
        throw InvalidInput(std::string(what) + ": subspaces live in different graded pieces");
}

}  // namespace

GradedSubspace::GradedSubspace(int degree, Eigen::Index ambientDim, Matrix basis, double tolerance)
    : degree_(degree), ambient_(ambientDim), basis_(std::move(basis)) {
    if (degree_ < 0) throw InvalidInput("GradedSubspace: negative degree");
    if (basis_.rows() != ambient_)
        throw InvalidInput("GradedSubspace: basis has " + std::to_string(basis_.rows()) + " rows, ambient dimension is " +
                           std::to_string(ambient_));
    if (basis_.cols() > ambient_) throw InvalidInput("GradedSubspace: more basis vectors than ambient dimension");
    const double defect = linalg::orthonormalityDefect(basis_);
    if (defect > tolerance)
        throw InvalidInput("GradedSubspace: basis not orthonormal (defect " + std::to_string(defect) + ")");
}

GradedSubspace GradedSubspace::zero(int degree, Eigen::Index ambientDim) {
    return GradedSubspace(degree, ambientDim, Matrix(ambientDim, 0));
}

GradedSubspace GradedSubspace::full(int degree, Eigen::Index ambientDim) {
    return GradedSubspace(degree, ambientDim, Matrix::Identity(ambientDim, ambientDim));
}

GradedSubspace GradedSubspace::span(int degree, Eigen::Index ambientDim, const Matrix& columns, double rankThreshold) {
    if (columns.rows() != ambientDim) throw InvalidInput("GradedSubspace::span: row count mismatch");
    return GradedSubspace(degree, ambientDim, linalg::orthonormalColumns(columns, rankThreshold));
}

GradedSubspace intersect(const GradedSubspace& m, const GradedSubspace& n, double threshold) {
    requireCompatible(m, n, "intersect");
    if (m.dim() == 0 || n.dim() == 0) return GradedSubspace::zero(m.degree(), m.ambientDim());
    const auto svd = linalg::thinSvd(m.basis().adjoint() * n.basis(), true, false);
    const RealVector& s = svd.s;
    Eigen::Index k = 0;
    while (k < s.size() && s(k) >= 1.0 - threshold) ++k;
    Matrix q = m.basis() * svd.u.leftCols(k);
    // principal vectors are orthonormal up to rounding; tidy them up
    if (k > 0) q = Eigen::HouseholderQR<Matrix>(q).householderQ() * Matrix::Identity(q.rows(), k);
    return GradedSubspace(m.degree(), m.ambientDim(), std::move(q));
}

GradedSubspace orthogonalComplement(const GradedSubspace& m) {
    return GradedSubspace(m.degree(), m.ambientDim(), linalg::complementColumns(m.basis(), m.ambientDim()));
}

GradedSubspace relativeComplement(const GradedSubspace& m, const GradedSubspace& n, double rankThreshold) {
    requireCompatible(m, n, "relativeComplement");
    if (n.dim() == 0 || m.dim() == 0) return m;
    // residual of M after removing N, restricted to coordinates of M
    const Matrix inside = m.basis().adjoint() * n.basis();
    const Matrix residual = Matrix::Identity(m.dim(), m.dim()) - inside * inside.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(residual);
    // eigenvalues ascending; keep those near 1 (directions of M orthogonal to N)
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
        if (eig.eigenvalues()(k) > 0.5) keep.push_back(k);
    Matrix coeffs(m.dim(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) coeffs.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
    Matrix q = m.basis() * coeffs;
    // remove any remaining component along N and re-orthonormalize
    q -= n.basis() * (n.basis().adjoint() * q);
    return GradedSubspace(m.degree(), m.ambientDim(), linalg::orthonormalColumns(q, rankThreshold));
}

GradedSubspace sum(const GradedSubspace& m, const GradedSubspace& n, double rankThreshold) {
    requireCompatible(m, n, "sum");
    Matrix both(m.ambientDim(), m.dim() + n.dim());
    both << m.basis(), n.basis();
    return GradedSubspace::span(m.degree(), m.ambientDim(), both, rankThreshold);
}

double subspaceDistance(const GradedSubspace& m, const GradedSubspace& n) {
    requireCompatible(m, n, "subspaceDistance");
    auto escape = [](const GradedSubspace& from, const GradedSubspace& into) {
        if (from.dim() == 0) return 0.0;
        const Matrix r = from.basis() - into.basis() * (into.basis().adjoint() * from.basis());
        return linalg::operatorNorm(r);
    };
    return std::max(escape(m, n), escape(n, m));
}

}  // namespace dalab

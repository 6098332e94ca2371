#include "dalab/linalg.hpp"

#include <Eigen/QR>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace dalab::linalg {

Svd thinSvd(const Matrix& m, bool wantU, bool wantV) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    Svd out;
    if (k == 0) {
        out.s = RealVector(0);
        if (wantU) out.u = Matrix(m.rows(), 0);
        if (wantV) out.v = Matrix(m.cols(), 0);
        return out;
    }
    Matrix a = m;  // zgesvd destroys its input
    out.s.resize(k);
    Matrix vt;
    if (wantU) out.u.resize(rows, k);
    if (wantV) vt.resize(k, cols);
    std::vector<double> superb(static_cast<std::size_t>(k));
    const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, wantU ? 'S' : 'N', wantV ? 'S' : 'N', rows, cols, a.data(),
                                           rows, out.s.data(), wantU ? out.u.data() : nullptr, rows,
                                           wantV ? vt.data() : nullptr, k, superb.data());
    if (info != 0)
        throw NumericalFailure("SVD failed (zgesvd info " + std::to_string(info) + ") on a " + std::to_string(rows) +
                               "x" + std::to_string(cols) + " matrix");
    if (wantV) out.v = vt.adjoint();
    return out;
}

Vector leastSquares(const Matrix& m, const Vector& b, double relThreshold) {
    const Svd svd = thinSvd(m, true, true);
    const Eigen::Index r = numericalRank(svd.s, relThreshold);
    Vector coeffs = svd.u.leftCols(r).adjoint() * b;
    for (Eigen::Index k = 0; k < r; ++k) coeffs(k) /= svd.s(k);
    return svd.v.leftCols(r) * coeffs;
}

RealVector singularValues(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return RealVector(0);
    return thinSvd(m, false, false).s;
}

double operatorNorm(const Matrix& m) {
    const RealVector sv = singularValues(m);
    return sv.size() == 0 ? 0.0 : sv(0);
}

Eigen::Index numericalRank(const RealVector& sv, double relThreshold) {
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    const double cut = relThreshold * sv(0);
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

Matrix orthonormalColumns(const Matrix& columns, double relThreshold) {
    if (columns.rows() == 0 || columns.cols() == 0) return Matrix(columns.rows(), 0);
    const Svd svd = thinSvd(columns, true, false);
    return svd.u.leftCols(numericalRank(svd.s, relThreshold));
}

Matrix complementColumns(const Matrix& q, Eigen::Index ambient) {
    if (q.cols() == 0) return Matrix::Identity(ambient, ambient);
    if (q.cols() >= ambient) return Matrix(ambient, 0);
    Eigen::HouseholderQR<Matrix> qr(q);
    Matrix full = qr.householderQ() * Matrix::Identity(ambient, ambient);
    return full.rightCols(ambient - q.cols());
}

double minSingularValueOnDomain(const Matrix& m) {
    if (m.cols() == 0) return 0.0;
    if (m.rows() < m.cols()) return 0.0;
    const RealVector sv = singularValues(m);
    return sv(sv.size() - 1);
}

namespace {

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

RealVector sparseSingularValues(const SparseMatrix& m) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    // Nodes 0..rows-1 are rows, rows..rows+cols-1 are columns.
    DisjointSet sets(rows + cols);
    std::vector<char> used(rows + cols, 0);
    for (int c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (it.value() == Complex(0.0)) continue;
            const int r = static_cast<int>(it.row());
            const int col = static_cast<int>(it.col());
            sets.unite(r, rows + col);
            used[r] = used[rows + col] = 1;
        }
    }
    std::vector<int> compOf(rows + cols, -1);
    std::vector<std::vector<int>> compRows, compCols;
    for (int v = 0; v < rows + cols; ++v) {
        if (!used[v]) continue;
        const int root = sets.find(v);
        if (compOf[root] < 0) {
            compOf[root] = static_cast<int>(compRows.size());
            compRows.emplace_back();
            compCols.emplace_back();
        }
        const int id = compOf[root];
        if (v < rows)
            compRows[id].push_back(v);
        else
            compCols[id].push_back(v - rows);
    }
    std::vector<int> localRow(rows, -1), localCol(cols, -1);
    std::vector<double> values;
    for (std::size_t k = 0; k < compRows.size(); ++k) {
        for (std::size_t a = 0; a < compRows[k].size(); ++a) localRow[compRows[k][a]] = static_cast<int>(a);
        for (std::size_t b = 0; b < compCols[k].size(); ++b) localCol[compCols[k][b]] = static_cast<int>(b);
        Matrix block = Matrix::Zero(static_cast<Eigen::Index>(compRows[k].size()),
                                    static_cast<Eigen::Index>(compCols[k].size()));
        for (int col : compCols[k]) {
            for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
                if (it.value() == Complex(0.0)) continue;
                block(localRow[it.row()], localCol[col]) += it.value();
            }
        }
        const RealVector sv = singularValues(block);
        values.insert(values.end(), sv.data(), sv.data() + sv.size());
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    return Eigen::Map<RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double orthonormalityDefect(const Matrix& q) {
    if (q.cols() == 0) return 0.0;
    const Matrix gram = q.adjoint() * q - Matrix::Identity(q.cols(), q.cols());
    return gram.cwiseAbs().maxCoeff();
}

}  // namespace dalab::linalg

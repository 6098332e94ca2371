#include "dalab/essnorm.hpp"

#include "dalab/linalg.hpp"
#include "dalab/parallel.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace dalab {

namespace {

SeriesEntry entryFromValues(int n, RealVector sv, double rankThreshold) {
    SeriesEntry e;
    e.degree = n;
    e.singularValues = std::move(sv);
    e.norm = e.singularValues.size() ? e.singularValues(0) : 0.0;
    e.rank = linalg::numericalRank(e.singularValues, rankThreshold);
    return e;
}

SeriesEntry entryFor(int n, const Matrix& block, double rankThreshold) {
    return entryFromValues(n, linalg::singularValues(block), rankThreshold);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit leastSquaresLine(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double denom = m * sxx - sx * sx;
    LineFit f;
    f.slope = denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / m;
    return f;
}

// Non-boundary degrees n ≥ 1 above the noise floor, top half of them.
std::vector<const SeriesEntry*> fitWindow(const std::vector<SeriesEntry>& entries) {
    std::vector<const SeriesEntry*> usable;
    for (const auto& e : entries)
        if (!e.boundary && e.degree >= 1 && e.norm > kNoiseFloor) usable.push_back(&e);
    return {usable.begin() + static_cast<std::ptrdiff_t>(usable.size() / 2), usable.end()};
}

PowerFit powerFit(const std::vector<const SeriesEntry*>& window) {
    std::vector<double> logN, logNorm, logRank;
    for (const auto* e : window) {
        logN.push_back(std::log(static_cast<double>(e->degree)));
        logNorm.push_back(std::log(e->norm));
        logRank.push_back(std::log(static_cast<double>(std::max<Eigen::Index>(e->rank, 1))));
    }
    PowerFit fit;
    fit.points = static_cast<int>(window.size());
    fit.gamma = -leastSquaresLine(logN, logNorm).slope;
    const auto r = leastSquaresLine(logN, logRank);
    fit.delta = r.slope;
    fit.rho = std::exp(r.intercept);
    return fit;
}

}  // namespace

QuotientModel::QuotientModel(int d, int maxDegree, const PieceFn& piece, int threads) : d_(d), maxDegree_(maxDegree) {
    if (d_ < 1) throw InvalidInput("QuotientModel: d must be positive");
    if (maxDegree_ < 0) throw InvalidInput("QuotientModel: negative maximal degree");
    if (!piece) {
        fullSpace_ = true;
        return;
    }
    pieces_.resize(static_cast<std::size_t>(maxDegree_ + 2));
    parallelFor(maxDegree_ + 2, threads, [&](int n) {
        GradedSubspace f = piece(n);
        if (f.degree() != n || f.ambientDim() != static_cast<Eigen::Index>(degreeDimension(d_, n)))
            throw InvalidInput("QuotientModel: piece for degree " + std::to_string(n) + " has the wrong shape");
        pieces_[static_cast<std::size_t>(n)] = std::move(f);
    });
}

QuotientModel QuotientModel::fromIdeal(const IdealSpec& ideal, int maxDegree, double rankThreshold, int threads) {
    return QuotientModel(
        ideal.variables(), maxDegree, [&](int n) { return quotientGradedPiece(ideal, n, rankThreshold); }, threads);
}

QuotientModel QuotientModel::fromVariety(const VarietySpec& variety, int maxDegree, double rankThreshold, int threads) {
    return QuotientModel(
        variety.variables(), maxDegree, [&](int n) { return varietyGradedPiece(variety, n, rankThreshold); }, threads);
}

QuotientModel QuotientModel::fullSpace(int d, int maxDegree, int threads) {
    return QuotientModel(d, maxDegree, PieceFn{}, threads);
}

GradedSubspace QuotientModel::piece(int n) const {
    if (n < 0 || n > maxDegree_ + 1)
        throw InvalidInput("QuotientModel: degree " + std::to_string(n) + " outside computed range 0.." +
                           std::to_string(maxDegree_ + 1));
    if (fullSpace_) return GradedSubspace::full(n, static_cast<Eigen::Index>(degreeDimension(d_, n)));
    return pieces_[static_cast<std::size_t>(n)];
}

void QuotientModel::requireBlockDegree(int n, const char* what) const {
    if (n < 0 || n > maxDegree_)
        throw InvalidInput(std::string(what) + ": degree " + std::to_string(n) + " outside computed range 0.." +
                           std::to_string(maxDegree_));
}

void QuotientModel::requireVariable(int i, const char* what) const {
    if (i < 0 || i >= d_) throw InvalidInput(std::string(what) + ": variable index out of range");
}

OperatorBlock QuotientModel::compressedShiftBlock(int i, int n) const {
    requireBlockDegree(n, "compressedShiftBlock");
    requireVariable(i, "compressedShiftBlock");
    const SparseMatrix s = shiftSparse(d_, i, n);
    if (fullSpace_) return {n, n + 1, Matrix(s)};
    const Matrix& qn = pieces_[static_cast<std::size_t>(n)].basis();
    const Matrix& qn1 = pieces_[static_cast<std::size_t>(n + 1)].basis();
    return {n, n + 1, qn1.adjoint() * (s * qn)};
}

OperatorBlock QuotientModel::commutatorBlock(int i, int j, int n) const {
    requireBlockDegree(n, "commutatorBlock");
    const Matrix ti = compressedShiftBlock(i, n).matrix, tj = compressedShiftBlock(j, n).matrix;
    Matrix c = ti.adjoint() * tj;
    if (n > 0) {
        const Matrix pi = compressedShiftBlock(i, n - 1).matrix, pj = compressedShiftBlock(j, n - 1).matrix;
        c -= pj * pi.adjoint();
    }
    return {n, n, c};
}

OperatorBlock QuotientModel::projectionCommutatorBlock(int i, int n) const {
    requireBlockDegree(n, "projectionCommutatorBlock");
    requireVariable(i, "projectionCommutatorBlock");
    const SparseMatrix s = shiftSparse(d_, i, n);
    if (fullSpace_) return {n, n + 1, Matrix::Zero(s.rows(), s.cols())};
    const Matrix& qn = pieces_[static_cast<std::size_t>(n)].basis();
    const Matrix& qn1 = pieces_[static_cast<std::size_t>(n + 1)].basis();
    const Matrix sAdjQ = SparseMatrix(s.adjoint()) * qn1;  // (Q_{n+1}ᴴ S)ᴴ
    Matrix block = qn1 * sAdjQ.adjoint();
    block -= (s * qn) * qn.adjoint();
    return {n, n + 1, block};
}

OperatorBlock QuotientModel::principalTermBlock(int i, int j, int n) const {
    requireBlockDegree(n, "principalTermBlock");
    requireVariable(i, "principalTermBlock");
    requireVariable(j, "principalTermBlock");
    const SparseMatrix full = fullCommutatorSparse(d_, i, j, n);
    if (fullSpace_) return {n, n, Matrix(full)};
    const Matrix& qn = pieces_[static_cast<std::size_t>(n)].basis();
    return {n, n, qn.adjoint() * (full * qn)};
}

double QuotientModel::lemmaIdentityResidual(int i, int j, int n) const {
    requireBlockDegree(n, "lemmaIdentityResidual");
    requireVariable(i, "lemmaIdentityResidual");
    requireVariable(j, "lemmaIdentityResidual");
    const SparseMatrix full = fullCommutatorSparse(d_, i, j, n);
    if (fullSpace_) {
        SparseMatrix c = SparseMatrix(shiftSparse(d_, i, n).adjoint()) * shiftSparse(d_, j, n);
        if (n > 0) c -= shiftSparse(d_, j, n - 1) * SparseMatrix(shiftSparse(d_, i, n - 1).adjoint());
        return (c - full).norm();
    }
    const Matrix c = commutatorBlock(i, j, n).matrix;
    const Matrix& q = pieces_[static_cast<std::size_t>(n)].basis();
    const Matrix& q1 = pieces_[static_cast<std::size_t>(n + 1)].basis();
    const SparseMatrix si = shiftSparse(d_, i, n), sj = shiftSparse(d_, j, n);
    // [P, S_k] = Q₁A_kᴴ − B_kQᴴ with A_k = S_kᴴQ₁, B_k = S_kQ, so the residual
    // Q(C − QᴴFQ)Qᴴ + [P,S_i]*[P,S_j] factors as [Q A_i] Z [Q A_j]ᴴ.
    const Matrix ai = SparseMatrix(si.adjoint()) * q1, aj = SparseMatrix(sj.adjoint()) * q1;
    const Matrix bi = si * q, bj = sj * q;
    const Eigen::Index r0 = q.cols(), r1 = q1.cols();
    Matrix z(r0 + r1, r0 + r1);
    z.topLeftCorner(r0, r0) = c - q.adjoint() * (full * q) + bi.adjoint() * bj;
    z.topRightCorner(r0, r1) = -(bi.adjoint() * q1);
    z.bottomLeftCorner(r1, r0) = -(q1.adjoint() * bj);
    z.bottomRightCorner(r1, r1) = Matrix::Identity(r1, r1);
    Matrix left(q.rows(), r0 + r1), right(q.rows(), r0 + r1);
    left << q, ai;
    right << q, aj;
    if (r0 + r1 >= q.rows()) return (left * z * right.adjoint()).norm();
    // Orthonormal factors drop out of the Frobenius norm.
    const Eigen::HouseholderQR<Matrix> ql(left), qr(right);
    const Matrix tl = ql.matrixQR().topRows(r0 + r1).triangularView<Eigen::Upper>();
    const Matrix tr = qr.matrixQR().topRows(r0 + r1).triangularView<Eigen::Upper>();
    return (tl * z * tr.adjoint()).norm();
}

CommutatorSeries commutatorSeries(const QuotientModel& model, int i, int j, double rankThreshold, int threads) {
    CommutatorSeries series;
    series.i = i;
    series.j = j;
    series.variables = model.variables();
    series.fullSpace = model.isFullSpace();
    const int count = model.maxDegree() + 1;
    series.commutator.resize(static_cast<std::size_t>(count));
    series.principal.resize(static_cast<std::size_t>(count));
    parallelFor(count, threads, [&](int n) {
        if (model.isFullSpace()) {
            // P = I: both series are the sparse full-space commutator.
            const RealVector sv = linalg::sparseSingularValues(fullCommutatorSparse(model.variables(), i, j, n));
            series.commutator[static_cast<std::size_t>(n)] = entryFromValues(n, sv, rankThreshold);
            series.principal[static_cast<std::size_t>(n)] = entryFromValues(n, sv, rankThreshold);
            return;
        }
        series.commutator[static_cast<std::size_t>(n)] = entryFor(n, model.commutatorBlock(i, j, n).matrix, rankThreshold);
        series.principal[static_cast<std::size_t>(n)] = entryFor(n, model.principalTermBlock(i, j, n).matrix, rankThreshold);
    });
    for (int n = std::max(0, count - 2); n < count; ++n) {
        series.commutator[static_cast<std::size_t>(n)].boundary = true;
        series.principal[static_cast<std::size_t>(n)].boundary = true;
    }
    return series;
}

std::string flagName(ConvergenceFlag flag) {
    switch (flag) {
        case ConvergenceFlag::Converging: return "converging";
        case ConvergenceFlag::Diverging: return "diverging";
        default: return "inconclusive";
    }
}

SchattenReport schattenPartialSum(const CommutatorSeries& series, double p, int truncation) {
    if (p < 1.0) throw InvalidInput("schattenPartialSum: p must be at least 1");
    if (truncation < 0 || truncation >= static_cast<int>(series.commutator.size()))
        throw InvalidInput("schattenPartialSum: truncation outside the computed degree range");
    SchattenReport report;
    report.p = p;
    report.truncation = truncation;
    double total = 0.0, majorant = 0.0;
    for (int n = 0; n <= truncation; ++n) {
        const auto& e = series.commutator[static_cast<std::size_t>(n)];
        double contribution = 0.0;
        for (Eigen::Index k = 0; k < e.singularValues.size(); ++k) contribution += std::pow(e.singularValues(k), p);
        total += contribution;
        majorant += std::pow(2.0, p) * static_cast<double>(degreeDimension(series.variables, n)) / std::pow(n + 1.0, p);
        report.contributions.push_back(contribution);
        report.partialSums.push_back(total);
        report.majorantPartialSums.push_back(majorant);
        report.dominatedByMajorant = report.dominatedByMajorant && total <= majorant * (1 + 1e-12);
    }

    // last quarter of the degree range
    const int quarterStart = truncation - (truncation + 1) / 4 + 1;
    for (int n = std::max(quarterStart, 0); n <= truncation; ++n)
        report.tailIncrement = std::max(report.tailIncrement, report.contributions[static_cast<std::size_t>(n)]);

    std::vector<double> logN, logC;
    std::vector<int> usable;
    for (int n = 1; n <= truncation; ++n) {
        const auto& e = series.commutator[static_cast<std::size_t>(n)];
        if (!e.boundary && e.norm > kNoiseFloor) usable.push_back(n);
    }
    for (std::size_t k = usable.size() / 2; k < usable.size(); ++k) {
        logN.push_back(std::log(static_cast<double>(usable[k])));
        logC.push_back(std::log(report.contributions[static_cast<std::size_t>(usable[k])]));
    }
    report.slopeDefined = logN.size() >= 3;
    if (report.slopeDefined) report.contributionSlope = leastSquaresLine(logN, logC).slope;

    const bool smallTail = report.tailIncrement < 1e-6;
    if (!report.slopeDefined) {
        // contributions have dropped to the noise floor
        report.flag = smallTail ? ConvergenceFlag::Converging : ConvergenceFlag::Inconclusive;
        report.contributionSlope = -std::numeric_limits<double>::infinity();
    } else if (smallTail && report.contributionSlope < -1.0) {
        report.flag = ConvergenceFlag::Converging;
    } else if (report.contributionSlope > -0.9) {
        report.flag = ConvergenceFlag::Diverging;
    } else {
        report.flag = ConvergenceFlag::Inconclusive;
    }
    return report;
}

DecayFit decayFit(const CommutatorSeries& series) {
    int nonzero = 0;
    for (const auto& e : series.commutator) nonzero += e.norm > kNoiseFloor;
    if (nonzero < 10)
        throw NumericalFailure("undefined fit: commutator series has only " + std::to_string(nonzero) +
                               " degrees above the noise floor (need 10)");
    DecayFit fit;
    fit.commutator = powerFit(fitWindow(series.commutator));
    const auto window = fitWindow(series.principal);
    if (window.size() < 3) throw NumericalFailure("undefined fit: principal-term series is numerically zero");
    fit.principal = powerFit(window);
    fit.pStar = (1.0 + fit.principal.delta) / fit.principal.gamma;
    return fit;
}

}  // namespace dalab

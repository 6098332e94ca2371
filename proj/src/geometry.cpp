#include "dalab/geometry.hpp"

#include "dalab/linalg.hpp"
#include "dalab/parallel.hpp"

#include <cmath>
#include <string>

namespace dalab {

namespace {

Matrix concatenate(const std::vector<Matrix>& blocks) {
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Matrix all(blocks.front().rows(), cols);
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        all.middleCols(c, b.cols()) = b;
        c += b.cols();
    }
    return all;
}

std::vector<Matrix> powerBases(const std::vector<SubspaceComponent>& components, int n) {
    std::vector<Matrix> out;
    for (const auto& comp : components) out.push_back(subspacePower(comp, n).basis());
    return out;
}

}  // namespace

GradedSubspace spanOf(const SubspaceComponent& component) {
    return GradedSubspace(1, component.ambient(), component.basis(), 1e-10);
}

double friedrichsCos(const GradedSubspace& m, const GradedSubspace& n, double intersectionThreshold,
                     double rankThreshold) {
    const auto common = intersect(m, n, intersectionThreshold);
    const auto mRest = relativeComplement(m, common, rankThreshold);
    const auto nRest = relativeComplement(n, common, rankThreshold);
    if (mRest.dim() == 0 || nRest.dim() == 0) return 0.0;
    return std::min(1.0, linalg::operatorNorm(mRest.basis().adjoint() * nRest.basis()));
}

AngleReport pairwiseAngles(const std::vector<GradedSubspace>& pieces, double intersectionThreshold) {
    AngleReport report;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (std::size_t j = i + 1; j < pieces.size(); ++j) {
            PairAngle pa;
            pa.first = static_cast<int>(i);
            pa.second = static_cast<int>(j);
            pa.intersectionDim = intersect(pieces[i], pieces[j], intersectionThreshold).dim();
            pa.cos = friedrichsCos(pieces[i], pieces[j], intersectionThreshold);
            report.maxCos = std::max(report.maxCos, pa.cos);
            report.allIntersectionsZero = report.allIntersectionsZero && pa.intersectionDim == 0;
            report.pairs.push_back(pa);
        }
    return report;
}

double maxPairwiseCos(const std::vector<GradedSubspace>& pieces, double intersectionThreshold) {
    if (pieces.size() < 2) throw InvalidInput("maxPairwiseCos: at least two subspaces required");
    return pairwiseAngles(pieces, intersectionThreshold).maxCos;
}

double maxPairwiseCos(const std::vector<SubspaceComponent>& components, double intersectionThreshold) {
    std::vector<GradedSubspace> spans;
    for (const auto& c : components) spans.push_back(spanOf(c));
    return maxPairwiseCos(spans, intersectionThreshold);
}

void requireDisjointSpans(const std::vector<SubspaceComponent>& components, double intersectionThreshold) {
    for (std::size_t i = 0; i < components.size(); ++i)
        for (std::size_t j = i + 1; j < components.size(); ++j) {
            if (components[i].ambient() != components[j].ambient())
                throw InvalidInput("components live in different ambient dimensions");
            if (intersect(spanOf(components[i]), spanOf(components[j]), intersectionThreshold).dim() > 0)
                throw InvalidInput("disjoint-spans precondition violated: components " + std::to_string(i) + " and " +
                                   std::to_string(j) + " intersect");
        }
}

TensorAngleTable tensorAngleDecay(const std::vector<SubspaceComponent>& components, int kMax, double tolerance,
                                  double intersectionThreshold, int threads) {
    if (components.size() < 2) throw InvalidInput("tensorAngleDecay: at least two components required");
    requireDisjointSpans(components, intersectionThreshold);
    const std::size_t m = components.size();
    std::vector<std::vector<double>> base(m, std::vector<double>(m, 0.0));
    TensorAngleTable table;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            base[i][j] = friedrichsCos(spanOf(components[i]), spanOf(components[j]), intersectionThreshold);
            table.c = std::max(table.c, base[i][j]);
        }
    std::vector<std::vector<TensorAngleRow>> perDegree(static_cast<std::size_t>(std::max(kMax, 0)));
    parallelFor(kMax, threads, [&](int idx) {
        const int k = idx + 1;
        std::vector<GradedSubspace> powers;
        for (const auto& comp : components) powers.push_back(subspacePower(comp, k));
        auto& rows = perDegree[static_cast<std::size_t>(idx)];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                TensorAngleRow row;
                row.first = static_cast<int>(i);
                row.second = static_cast<int>(j);
                row.power = k;
                row.cos = friedrichsCos(powers[i], powers[j], intersectionThreshold);
                row.pairBound = std::pow(base[i][j], k);
                row.globalBound = std::pow(table.c, k);
                row.pass = row.cos <= row.globalBound + tolerance;
                rows.push_back(row);
            }
    });
    for (auto& rows : perDegree)
        for (auto& row : rows) {
            table.pass = table.pass && row.pass;
            table.rows.push_back(row);
        }
    return table;
}

DecompositionReport componentDecomposition(const Vector& v, const std::vector<GradedSubspace>& pieces, double c,
                                           double independenceThreshold, double tolerance) {
    if (pieces.empty()) throw InvalidInput("componentDecomposition: no components");
    std::vector<Matrix> bases;
    for (const auto& p : pieces) {
        if (p.ambientDim() != v.size() || p.degree() != pieces.front().degree())
            throw InvalidInput("componentDecomposition: components and vector live in different graded pieces");
        bases.push_back(p.basis());
    }
    const Matrix all = concatenate(bases);
    DecompositionReport report;
    report.degree = pieces.front().degree();
    report.k = static_cast<int>(pieces.size());
    report.c = c;
    report.sigmaMin = linalg::minSingularValueOnDomain(all);
    if (report.sigmaMin <= independenceThreshold)
        throw NumericalFailure("decomposition not unique: component pieces are linearly dependent at degree " +
                               std::to_string(report.degree) + " (sigma_min " + std::to_string(report.sigmaMin) + ")");
    const Vector x = linalg::leastSquares(all, v, 1e-14);
    Vector rebuilt = Vector::Zero(v.size());
    Eigen::Index offset = 0;
    for (const auto& b : bases) {
        report.parts.push_back(b * x.segment(offset, b.cols()));
        rebuilt += report.parts.back();
        report.partsSquared += x.segment(offset, b.cols()).squaredNorm();
        offset += b.cols();
    }
    report.residual = (v - rebuilt).norm();
    if (report.residual > tolerance * std::max(1.0, v.norm()))
        throw InvalidInput("componentDecomposition: vector is not in the sum of the component pieces (residual " +
                           std::to_string(report.residual) + ")");
    report.normSquared = v.squaredNorm();
    const double kcn = report.k * std::pow(c, report.degree);
    report.applicable = 1.0 - kcn > 0.0;
    report.lowerBound = (1.0 - kcn) * report.normSquared;
    report.upperBound = (1.0 + kcn) * report.normSquared;
    const double slack = tolerance * std::max(1.0, report.normSquared);
    report.lowerHolds = report.lowerBound <= report.partsSquared + slack;
    report.upperHolds = report.partsSquared <= report.upperBound + slack;
    return report;
}

ClosednessReport closednessWitness(const std::vector<SubspaceComponent>& components, int nMax, double tolerance,
                                   double intersectionThreshold, int threads) {
    if (components.size() < 2) throw InvalidInput("closednessWitness: at least two components required");
    requireDisjointSpans(components, intersectionThreshold);
    ClosednessReport report;
    report.c = maxPairwiseCos(components, intersectionThreshold);
    report.components = static_cast<int>(components.size());
    report.rows.resize(static_cast<std::size_t>(nMax + 1));
    parallelFor(nMax + 1, threads, [&](int n) {
        ClosednessRow row;
        row.degree = n;
        row.sigmaMin = linalg::minSingularValueOnDomain(concatenate(powerBases(components, n)));
        row.boundSquared = 1.0 - std::pow(report.c, n) * (report.components - 1);
        row.bound = std::sqrt(std::max(0.0, row.boundSquared));
        row.boundActive = row.boundSquared > 0.0;
        row.pass = !row.boundActive || row.sigmaMin * row.sigmaMin >= row.boundSquared - tolerance;
        report.rows[static_cast<std::size_t>(n)] = row;
    });
    for (const auto& row : report.rows) report.pass = report.pass && row.pass;
    return report;
}

SumCheckReport subspaceSumCheck(const std::vector<SubspaceComponent>& components, int nMax, double rankThreshold,
                                int threads) {
    if (components.empty()) throw InvalidInput("subspaceSumCheck: no components");
    SumCheckReport report;
    report.rows.resize(static_cast<std::size_t>(nMax + 1));
    parallelFor(nMax + 1, threads, [&](int n) {
        const RealVector sv = linalg::singularValues(concatenate(powerBases(components, n)));
        SumCheckRow row;
        row.degree = n;
        row.rank = linalg::numericalRank(sv, rankThreshold);
        row.sigmaMax = sv(0);
        row.sigmaMin = sv(row.rank - 1);
        row.ratio = row.sigmaMin / row.sigmaMax;
        report.rows[static_cast<std::size_t>(n)] = row;
    });
    report.floor = report.rows.front().sigmaMin;
    report.ratioFloor = report.rows.front().ratio;
    for (const auto& row : report.rows) {
        report.floor = std::min(report.floor, row.sigmaMin);
        report.ratioFloor = std::min(report.ratioFloor, row.ratio);
    }
    return report;
}

}  // namespace dalab

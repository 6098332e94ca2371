#include "dalab/similarity.hpp"

#include "dalab/parallel.hpp"
#include "dalab/essnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dalab {

namespace {

void requireVector(const Vector& v, int d, const char* what) {
    if (v.size() != d)
        throw InvalidInput(std::string(what) + ": expected " + std::to_string(d) + " coefficients, got " +
                           std::to_string(v.size()));
}

Matrix multiplierMatrix(const Vector& g, int n, const Matrix& from) {
    const int d = static_cast<int>(g.size());
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(degreeDimension(d, n + 1)), from.cols());
    for (int k = 0; k < d; ++k)
        if (g(k) != Complex(0.0)) out += g(k) * (shiftSparse(d, k, n) * from);
    return out;
}

// [X*, Y] on the middle piece of X_{n-1} → X_n → X_{n+1}, given blocks for
// X at degrees n−1 and n (Y likewise).
Matrix commutatorOf(const Matrix& xLow, const Matrix& xHigh, const Matrix& yLow, const Matrix& yHigh) {
    return xHigh.adjoint() * yHigh - yLow * xLow.adjoint();
}

}  // namespace

LinearMapSpec::LinearMapSpec(Matrix a, VarietySpec source, VarietySpec target, double isometryTolerance)
    : a_(std::move(a)), source_(std::move(source)), target_(std::move(target)) {
    if (!source_.hasComponents() || !target_.hasComponents())
        throw InvalidInput("LinearMapSpec: source and target must be given by components");
    if (a_.cols() != source_.variables())
        throw InvalidInput("LinearMapSpec: matrix has " + std::to_string(a_.cols()) + " columns but the source lives in C^" +
                           std::to_string(source_.variables()));
    if (a_.rows() != target_.variables())
        throw InvalidInput("LinearMapSpec: matrix has " + std::to_string(a_.rows()) + " rows but the target lives in C^" +
                           std::to_string(target_.variables()));
    const auto& src = source_.components();
    const auto& dst = target_.components();
    if (src.size() != dst.size())
        throw InvalidInput("LinearMapSpec: " + std::to_string(src.size()) + " source components vs " +
                           std::to_string(dst.size()) + " target components");
    for (std::size_t k = 0; k < src.size(); ++k) {
        const Matrix image = a_ * src[k].basis();
        const double defect = linalg::orthonormalityDefect(image);
        if (defect > isometryTolerance)
            throw InvalidInput("LinearMapSpec: matrix is not isometric on source component " + std::to_string(k) +
                               " (defect " + std::to_string(defect) + ")");
        if (src[k].dim() != dst[k].dim())
            throw InvalidInput("LinearMapSpec: component " + std::to_string(k) + " changes dimension");
    }
}

SimilarityBlock gradedSimilarityBlock(const LinearMapSpec& spec, int n, double tolerance, double rankThreshold) {
    if (n < 0) throw InvalidInput("gradedSimilarityBlock: negative degree");
    SimilarityBlock out;
    out.source = varietyGradedPiece(spec.source(), n, rankThreshold);
    out.target = varietyGradedPiece(spec.target(), n, rankThreshold);
    const LinearComposer composer(spec.matrix().adjoint(), n);
    const Matrix images = composer.apply(out.source.basis());
    const Matrix& q = out.target.basis();
    Matrix coeffs = q.adjoint() * images;
    out.escape = linalg::operatorNorm(images - q * coeffs);
    if (out.escape > tolerance)
        throw NumericalFailure("image escapes target graded piece at degree " + std::to_string(n) + " (residual " +
                               std::to_string(out.escape) + ")");
    out.block = OperatorBlock{n, n, std::move(coeffs)};
    return out;
}

SimilarityModel::SimilarityModel(const LinearMapSpec& spec, int maxDegree, double tolerance, double rankThreshold,
                                 int threads)
    : spec_(spec), maxDegree_(maxDegree) {
    if (maxDegree < 0) throw InvalidInput("SimilarityModel: negative maximal degree");
    blocks_.resize(static_cast<std::size_t>(maxDegree) + 2);
    parallelFor(maxDegree + 2, threads, [&](int n) {
        blocks_[static_cast<std::size_t>(n)] = gradedSimilarityBlock(spec_, n, tolerance, rankThreshold);
    });
}

const SimilarityBlock& SimilarityModel::at(int n) const {
    if (n < 0 || n > maxDegree_ + 1)
        throw InvalidInput("SimilarityModel: degree " + std::to_string(n) + " outside 0.." +
                           std::to_string(maxDegree_ + 1));
    return blocks_[static_cast<std::size_t>(n)];
}

double kernelActionCheck(const LinearMapSpec& spec, const Point& lambda, int n, double tolerance) {
    if (lambda.size() != spec.sourceDim()) throw InvalidInput("kernelActionCheck: point has the wrong dimension");
    bool onVariety = false;
    for (const auto& comp : spec.source().components()) {
        const Vector off = lambda - comp.basis() * (comp.basis().adjoint() * lambda);
        if (off.norm() <= tolerance * std::max(1.0, lambda.norm())) {
            onVariety = true;
            break;
        }
    }
    if (!onVariety) throw InvalidInput("kernelActionCheck: point is not on any source component");
    const SimilarityBlock blk = gradedSimilarityBlock(spec, n);
    const Vector x = blk.source.basis().adjoint() * kernelCoordinates(lambda, n);
    const Vector image = blk.target.basis() * (blk.block.matrix * x);
    const Vector expected = kernelCoordinates(spec.matrix() * lambda, n);
    return (image - expected).norm();
}

Matrix linearMultiplierBlock(const Vector& g, const GradedSubspace& from, const GradedSubspace& to) {
    if (to.degree() != from.degree() + 1) throw InvalidInput("linearMultiplierBlock: target must be one degree up");
    if (static_cast<std::uint64_t>(from.ambientDim()) != degreeDimension(static_cast<int>(g.size()), from.degree()))
        throw InvalidInput("linearMultiplierBlock: coefficient count does not match the ambient space");
    return to.basis().adjoint() * multiplierMatrix(g, from.degree(), from.basis());
}

Vector composeWithAdjoint(const Vector& g, const Matrix& a) {
    requireVector(g, static_cast<int>(a.cols()), "composeWithAdjoint");
    return a.conjugate() * g;
}

Vector composeWithMap(const Vector& f, const Matrix& a) {
    requireVector(f, static_cast<int>(a.rows()), "composeWithMap");
    return a.transpose() * f;
}

double intertwinerResidual(const SimilarityModel& model, const Vector& g, int n) {
    if (n < 0 || n > model.maxDegree()) throw InvalidInput("intertwinerResidual: degree out of range");
    const Matrix& a = model.spec().matrix();
    requireVector(g, static_cast<int>(a.cols()), "intertwinerResidual");
    const SimilarityBlock& lo = model.at(n);
    const SimilarityBlock& hi = model.at(n + 1);
    const Matrix mv = linearMultiplierBlock(g, lo.source, hi.source);
    const Matrix mw = linearMultiplierBlock(composeWithAdjoint(g, a), lo.target, hi.target);
    return linalg::operatorNorm(hi.block.matrix * mv - mw * lo.block.matrix);
}

double adjointIntertwinerResidual(const SimilarityModel& model, const Vector& f, int n) {
    if (n < 0 || n > model.maxDegree()) throw InvalidInput("adjointIntertwinerResidual: degree out of range");
    const Matrix& a = model.spec().matrix();
    requireVector(f, static_cast<int>(a.rows()), "adjointIntertwinerResidual");
    const SimilarityBlock& lo = model.at(n);
    const SimilarityBlock& hi = model.at(n + 1);
    const Matrix mw = linearMultiplierBlock(f, lo.target, hi.target);
    const Matrix mv = linearMultiplierBlock(composeWithMap(f, a), lo.source, hi.source);
    return linalg::operatorNorm(mw.adjoint() * hi.block.matrix - lo.block.matrix * mv.adjoint());
}

TransportRow conjugationTransportCheck(const SimilarityModel& model, const Vector& f, const Vector& g, int n,
                                       double invertibility) {
    if (n < 1 || n > model.maxDegree()) throw InvalidInput("conjugationTransportCheck: degree must lie in 1..N");
    const Matrix& a = model.spec().matrix();
    requireVector(f, static_cast<int>(a.cols()), "conjugationTransportCheck");
    requireVector(g, static_cast<int>(a.cols()), "conjugationTransportCheck");
    TransportRow row;
    row.degree = n;
    const SimilarityBlock& b0 = model.at(n - 1);
    const SimilarityBlock& b1 = model.at(n);
    const SimilarityBlock& b2 = model.at(n + 1);
    const Matrix& an = b1.block.matrix;
    const RealVector sv = linalg::singularValues(an);
    const bool square = an.rows() == an.cols();
    row.sigmaMin = (!square || sv.size() == 0) ? 0.0 : sv(sv.size() - 1);
    row.condition = row.sigmaMin > 0.0 ? sv(0) / row.sigmaMin : std::numeric_limits<double>::infinity();
    if (!square || row.sigmaMin < invertibility) {
        row.skipped = true;
        return row;
    }
    const Vector fw = composeWithAdjoint(f, a);
    const Vector gw = composeWithAdjoint(g, a);
    const Vector fv = composeWithMap(fw, a);
    const Matrix left = commutatorOf(linearMultiplierBlock(fw, b0.target, b1.target),
                                     linearMultiplierBlock(fw, b1.target, b2.target),
                                     linearMultiplierBlock(gw, b0.target, b1.target),
                                     linearMultiplierBlock(gw, b1.target, b2.target));
    const Matrix inner = commutatorOf(linearMultiplierBlock(fv, b0.source, b1.source),
                                      linearMultiplierBlock(fv, b1.source, b2.source),
                                      linearMultiplierBlock(g, b0.source, b1.source),
                                      linearMultiplierBlock(g, b1.source, b2.source));
    const Matrix right = an * inner * an.inverse();
    row.residual = (left - right).norm();
    const double scale = left.norm();
    row.relative = scale > 0.0 ? row.residual / scale : row.residual;
    return row;
}

PolarReport polarAnalysis(const SimilarityModel& model, double invertibility, double tolerance) {
    const LinearMapSpec& spec = model.spec();
    requireDisjointSpans(spec.target().components());
    PolarReport report;
    report.k = spec.components();
    report.c = std::max(maxPairwiseCos(spec.source().components()), maxPairwiseCos(spec.target().components()));
    if (report.c >= 1.0 - 1e-12)
        throw NumericalFailure("angle degeneracy: max pairwise cosine " + std::to_string(report.c) + " is not below 1");
    const int nMax = model.maxDegree();
    const double c = report.c;
    const double k = report.k;

    report.rows.resize(static_cast<std::size_t>(nMax) + 1);
    double running = 0.0;
    double m = 0.0;
    for (int n = 0; n <= nMax; ++n) {
        PolarRow& row = report.rows[static_cast<std::size_t>(n)];
        row.degree = n;
        const Matrix& an = model.at(n).block.matrix;
        RealVector sv = linalg::singularValues(an);
        const Eigen::Index domain = an.cols();
        if (sv.size() < domain) {
            RealVector padded = RealVector::Zero(domain);
            padded.head(sv.size()) = sv;
            sv = padded;
        }
        for (Eigen::Index t = 0; t < sv.size(); ++t)
            if (sv(t) < invertibility) ++report.zeroSingularValues;
        row.singularValues = sv;
        row.invertible = an.rows() == an.cols() && (sv.size() == 0 || sv.minCoeff() >= invertibility);
        for (Eigen::Index t = 0; t < sv.size(); ++t) {
            const double dev = std::abs(sv(t) - 1.0);
            row.maxDeviation = std::max(row.maxDeviation, dev);
            row.deviationSum += dev;
        }
        running += row.deviationSum;
        row.partialSum = running;
        const double cn = std::pow(c, n);
        if (row.maxDeviation > tolerance) {
            if (cn > 0.0)
                m = std::max(m, row.maxDeviation / cn);
            else
                m = std::numeric_limits<double>::infinity();
        }
        const double kcn = k * cn;
        row.estApplicable = 1.0 - kcn > 0.0;
        if (row.estApplicable && sv.size() > 0) {
            const double hi = (1.0 + kcn) / (1.0 - kcn);
            const double lo = (1.0 - kcn) / (1.0 + kcn);
            const double smax = sv.maxCoeff();
            const double smin = sv.minCoeff();
            row.est2Holds = smax * smax <= hi + tolerance;
            row.est3Holds = smin * smin >= lo - tolerance;
            report.est2Holds = report.est2Holds && row.est2Holds;
            report.est3Holds = report.est3Holds && row.est3Holds;
        }
    }
    report.fittedM = m;
    for (auto& row : report.rows) row.envelope = m * std::pow(c, row.degree);

    for (int n = nMax; n >= 0; --n) {
        if (!report.rows[static_cast<std::size_t>(n)].invertible) break;
        report.firstInvertibleDegree = n;
    }

    const int d = spec.sourceDim();
    if (m == 0.0) {
        report.tailBound = 0.0;
        report.tailFinite = true;
    } else if (std::isfinite(m) && c > 0.0) {
        const double next = static_cast<double>(nMax + 1);
        const double r = std::pow((next + 1.0) / next, d - 1) * c;
        if (r < 1.0) {
            report.tailBound = std::pow(next, d - 1) * m * std::pow(c, nMax + 1) / (1.0 - r);
            report.tailFinite = true;
        } else {
            report.tailBound = std::numeric_limits<double>::infinity();
        }
    } else {
        report.tailBound = std::numeric_limits<double>::infinity();
    }
    return report;
}

OrthogonalModel orthogonalModelBuilder(const std::vector<SubspaceComponent>& components, double intersectionThreshold) {
    if (components.empty()) throw InvalidInput("orthogonalModelBuilder: no components");
    requireDisjointSpans(components, intersectionThreshold);
    const int d = components.front().ambient();
    int total = 0;
    std::vector<int> offsets;
    for (const auto& comp : components) {
        offsets.push_back(total);
        total += comp.dim();
    }
    Matrix a(d, total);
    std::vector<SubspaceComponent> ks;
    for (std::size_t j = 0; j < components.size(); ++j) {
        const int dj = components[j].dim();
        a.middleCols(offsets[j], dj) = components[j].basis();
        Matrix block = Matrix::Zero(total, dj);
        block.middleRows(offsets[j], dj) = Matrix::Identity(dj, dj);
        ks.emplace_back(block);
    }
    LinearMapSpec spec(a, VarietySpec::fromComponents(ks), VarietySpec::fromComponents(components));
    return OrthogonalModel{total, std::move(ks), std::move(a), std::move(offsets), std::move(spec)};
}

double decoupledCommutatorResidual(const OrthogonalModel& model, int maxDegree, int threads) {
    if (maxDegree < 2) throw InvalidInput("decoupledCommutatorResidual: needs degrees up to at least 2");
    const int D = model.D;
    const QuotientModel quotient =
        QuotientModel::fromVariety(model.spec.source(), maxDegree, 1e-10, threads);
    std::vector<int> blockOf(static_cast<std::size_t>(D));
    for (std::size_t j = 0; j < model.kComponents.size(); ++j)
        for (int t = 0; t < model.kComponents[j].dim(); ++t) blockOf[static_cast<std::size_t>(model.offsets[j] + t)] =
            static_cast<int>(j);

    std::vector<double> worst(static_cast<std::size_t>(maxDegree) + 1, 0.0);
    parallelFor(maxDegree - 1, threads, [&](int idx) {
        const int n = idx + 2;
        const GradedSubspace piece = quotient.piece(n);
        const Matrix& q = piece.basis();
        // Coordinates of each K_j^n inside H_n(D), one embedding per block.
        std::vector<Matrix> embedded(model.kComponents.size());
        for (std::size_t j = 0; j < model.kComponents.size(); ++j) {
            const int dj = model.kComponents[j].dim();
            const auto local = enumerateDegree(dj, n);
            Matrix e = Matrix::Zero(q.rows(), static_cast<Eigen::Index>(local.size()));
            for (std::size_t b = 0; b < local.size(); ++b) {
                std::vector<int> alpha(static_cast<std::size_t>(D), 0);
                for (int t = 0; t < dj; ++t) alpha[static_cast<std::size_t>(model.offsets[j] + t)] = local[b][t];
                e(static_cast<Eigen::Index>(basisRank(MultiIndex(alpha))), static_cast<Eigen::Index>(b)) = 1.0;
            }
            embedded[j] = q.adjoint() * e;
        }
        double w = 0.0;
        for (int i = 0; i < D; ++i) {
            for (int j = 0; j < D; ++j) {
                const Matrix actual = quotient.commutatorBlock(i, j, n).matrix;
                Matrix predicted = Matrix::Zero(actual.rows(), actual.cols());
                const int bi = blockOf[static_cast<std::size_t>(i)];
                if (bi == blockOf[static_cast<std::size_t>(j)]) {
                    const int off = model.offsets[static_cast<std::size_t>(bi)];
                    const Matrix& e = embedded[static_cast<std::size_t>(bi)];
                    const Matrix local =
                        fullCommutatorBlock(model.kComponents[static_cast<std::size_t>(bi)].dim(), i - off, j - off, n)
                            .matrix;
                    predicted = e * local * e.adjoint();
                }
                w = std::max(w, (actual - predicted).cwiseAbs().maxCoeff());
            }
        }
        worst[static_cast<std::size_t>(n)] = w;
    });
    return *std::max_element(worst.begin(), worst.end());
}

}  // namespace dalab

#include "dalab/variety.hpp"

#include "dalab/linalg.hpp"

#include <string>

namespace dalab {

namespace {

bool dividedBySome(const MultiIndex& gamma, const std::vector<HomogeneousPolynomial>& generators) {
    for (const auto& g : generators)
        if (g.terms().begin()->first.divides(gamma)) return true;
    return false;
}

Matrix unitColumns(Eigen::Index ambient, const std::vector<Eigen::Index>& rows) {
    Matrix m = Matrix::Zero(ambient, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) m(rows[c], static_cast<Eigen::Index>(c)) = 1.0;
    return m;
}

// ε-coordinates of z^β·g in H_n.
void multipleColumn(const HomogeneousPolynomial& g, const MultiIndex& beta, Eigen::Ref<Vector> out) {
    out.setZero();
    for (const auto& [alpha, c] : g.terms()) {
        const MultiIndex gamma = alpha + beta;
        out(static_cast<Eigen::Index>(basisRank(gamma))) += c * std::sqrt(monomialNormSquaredValue(gamma));
    }
}

GradedSubspace monomialPiece(int d, int n, const std::vector<const IdealSpec*>& ideals, bool inside) {
    const auto indices = enumerateDegree(d, n);
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        bool inAll = true;
        for (const auto* ideal : ideals) inAll = inAll && dividedBySome(indices[r], ideal->generators());
        if (inAll == inside) rows.push_back(static_cast<Eigen::Index>(r));
    }
    const auto ambient = static_cast<Eigen::Index>(indices.size());
    return GradedSubspace(n, ambient, unitColumns(ambient, rows));
}

void requireDegree(int n) {
    if (n < 0) throw InvalidInput("negative degree " + std::to_string(n));
}

}  // namespace

IdealSpec::IdealSpec(int d, std::vector<HomogeneousPolynomial> generators, bool radical)
    : d_(d), generators_(std::move(generators)), radical_(radical) {
    if (d_ < 1) throw InvalidInput("IdealSpec: d must be positive");
    if (generators_.empty()) throw InvalidInput("IdealSpec: generator list is empty");
    for (std::size_t k = 0; k < generators_.size(); ++k) {
        if (generators_[k].variables() != d_)
            throw InvalidInput("IdealSpec: generator " + std::to_string(k) + " has " +
                               std::to_string(generators_[k].variables()) + " variables, expected " + std::to_string(d_));
        if (generators_[k].isZero()) throw InvalidInput("IdealSpec: generator " + std::to_string(k) + " is zero");
    }
}

bool IdealSpec::isMonomial() const {
    for (const auto& g : generators_)
        if (!g.isMonomial()) return false;
    return true;
}

SubspaceComponent::SubspaceComponent(Matrix basis, double tolerance) : basis_(std::move(basis)) {
    if (basis_.cols() < 1) throw InvalidInput("SubspaceComponent: at least one basis column required");
    if (basis_.cols() > basis_.rows()) throw InvalidInput("SubspaceComponent: more columns than ambient dimension");
    const double defect = linalg::orthonormalityDefect(basis_);
    if (defect > tolerance)
        throw InvalidInput("SubspaceComponent: basis columns are not orthonormal (defect " + std::to_string(defect) + ")");
}

SubspaceComponent SubspaceComponent::spannedBy(const Matrix& columns, double rankThreshold) {
    Matrix q = linalg::orthonormalColumns(columns, rankThreshold);
    if (q.cols() < columns.cols()) throw InvalidInput("SubspaceComponent: spanning columns are linearly dependent");
    return SubspaceComponent(std::move(q));
}

VarietySpec VarietySpec::fromComponents(std::vector<SubspaceComponent> components, double containmentTolerance) {
    if (components.empty()) throw InvalidInput("VarietySpec: component list is empty");
    const int d = components.front().ambient();
    for (std::size_t k = 0; k < components.size(); ++k)
        if (components[k].ambient() != d)
            throw InvalidInput("VarietySpec: component " + std::to_string(k) + " lives in C^" +
                               std::to_string(components[k].ambient()) + ", expected C^" + std::to_string(d));
    for (std::size_t a = 0; a < components.size(); ++a)
        for (std::size_t b = 0; b < components.size(); ++b) {
            if (a == b) continue;
            const Matrix& qa = components[a].basis();
            const Matrix& qb = components[b].basis();
            if (qa.cols() > qb.cols()) continue;
            const double escape = linalg::operatorNorm(qa - qb * (qb.adjoint() * qa));
            if (escape <= containmentTolerance && (qa.cols() < qb.cols() || a > b))
                throw InvalidInput("VarietySpec: component " + std::to_string(a) + " is contained in component " +
                                   std::to_string(b) + " (redundant)");
        }
    return VarietySpec(std::move(components));
}

VarietySpec VarietySpec::fromIdeal(IdealSpec ideal) {
    if (!ideal.radical()) throw InvalidInput("VarietySpec: ideal-defined varieties require radical = true");
    return VarietySpec(std::move(ideal));
}

int VarietySpec::variables() const {
    return hasComponents() ? components().front().ambient() : ideal().variables();
}

GradedSubspace idealGradedPiece(const IdealSpec& ideal, int n, double rankThreshold) {
    requireDegree(n);
    const int d = ideal.variables();
    if (ideal.isMonomial()) return monomialPiece(d, n, {&ideal}, true);
    const auto ambient = static_cast<Eigen::Index>(degreeDimension(d, n));
    Eigen::Index count = 0;
    for (const auto& g : ideal.generators())
        if (g.degree() <= n) count += static_cast<Eigen::Index>(degreeDimension(d, n - g.degree()));
    Matrix columns(ambient, count);
    Eigen::Index c = 0;
    for (const auto& g : ideal.generators()) {
        if (g.degree() > n) continue;
        for (const auto& beta : enumerateDegree(d, n - g.degree())) multipleColumn(g, beta, columns.col(c++));
    }
    return GradedSubspace::span(n, ambient, columns, rankThreshold);
}

GradedSubspace quotientGradedPiece(const IdealSpec& ideal, int n, double rankThreshold) {
    requireDegree(n);
    if (ideal.isMonomial()) return monomialPiece(ideal.variables(), n, {&ideal}, false);
    return orthogonalComplement(idealGradedPiece(ideal, n, rankThreshold));
}

GradedSubspace subspacePower(const SubspaceComponent& component, int n) {
    requireDegree(n);
    const LinearComposer composer(component.basis().adjoint(), n);
    Matrix images = composer.monomialImages();
    const auto ambient = images.rows();
    return GradedSubspace(n, ambient, std::move(images), 1e-9);
}

GradedSubspace varietyGradedPiece(const VarietySpec& variety, int n, double rankThreshold) {
    requireDegree(n);
    if (!variety.hasComponents()) return quotientGradedPiece(variety.ideal(), n, rankThreshold);
    const auto& comps = variety.components();
    if (comps.size() == 1) return subspacePower(comps.front(), n);
    std::vector<Matrix> pieces;
    Eigen::Index total = 0;
    for (const auto& comp : comps) {
        pieces.push_back(subspacePower(comp, n).basis());
        total += pieces.back().cols();
    }
    const Eigen::Index ambient = pieces.front().rows();
    Matrix all(ambient, total);
    Eigen::Index c = 0;
    for (const auto& p : pieces) {
        all.middleCols(c, p.cols()) = p;
        c += p.cols();
    }
    return GradedSubspace::span(n, ambient, all, rankThreshold);
}

std::vector<RadicalConsistencyRow> checkRadicalConsistency(const IdealSpec& ideal, const VarietySpec& variety, int nMax,
                                                           double rankThreshold) {
    if (variety.variables() != ideal.variables())
        throw InvalidInput("checkRadicalConsistency: ideal and variety live in different dimensions");
    std::vector<RadicalConsistencyRow> rows;
    for (int n = 0; n <= nMax; ++n) {
        const auto f = quotientGradedPiece(ideal, n, rankThreshold);
        const auto v = varietyGradedPiece(variety, n, rankThreshold);
        rows.push_back({n, f.dim(), v.dim(), subspaceDistance(f, v)});
    }
    return rows;
}

std::vector<long long> hilbertDimensions(const IdealSpec& ideal, int nFrom, int nTo, double rankThreshold) {
    if (nFrom < 0 || nTo < nFrom) throw InvalidInput("hilbertDimensions: empty or negative degree range");
    std::vector<long long> dims;
    for (int n = nFrom; n <= nTo; ++n) dims.push_back(quotientGradedPiece(ideal, n, rankThreshold).dim());
    return dims;
}

std::vector<long long> hilbertDimensions(const VarietySpec& variety, int nFrom, int nTo, double rankThreshold) {
    if (nFrom < 0 || nTo < nFrom) throw InvalidInput("hilbertDimensions: empty or negative degree range");
    std::vector<long long> dims;
    for (int n = nFrom; n <= nTo; ++n) dims.push_back(varietyGradedPiece(variety, n, rankThreshold).dim());
    return dims;
}

Rational HilbertFit::operator()(long long n) const {
    Rational value = 0, power = 1;
    for (const auto& c : monomialCoefficients) {
        value += c * power;
        power *= n;
    }
    return value;
}

HilbertFit hilbertPolynomialFit(const std::vector<long long>& dims, int startDegree) {
    const int len = static_cast<int>(dims.size());
    std::vector<std::vector<long long>> diffs{dims};
    int order = -1;
    for (int r = 0; len - r >= 3; ++r) {
        if (r > 0) {
            const auto& prev = diffs.back();
            std::vector<long long> next(prev.size() - 1);
            for (std::size_t k = 0; k + 1 < prev.size(); ++k) next[k] = prev[k + 1] - prev[k];
            diffs.push_back(std::move(next));
        }
        const auto& cur = diffs.back();
        const auto m = cur.size();
        if (cur[m - 1] == cur[m - 2] && cur[m - 2] == cur[m - 3]) {
            order = r;
            break;
        }
    }
    if (order < 0)
        throw NumericalFailure("insufficient degree range: finite differences up to order " + std::to_string(len - 3) +
                               " over degrees " + std::to_string(startDegree) + ".." +
                               std::to_string(startDegree + len - 1) + " never became constant over 3 degrees; extend to degree " +
                               std::to_string(startDegree + len) + " or beyond");

    HilbertFit fit;
    fit.startDegree = startDegree;
    // Newton form anchored at position j: h(n) = Σ_k Δ^k[j]·C(n − n_j, k).
    const int j = len - 1 - order;
    const long long anchor = startDegree + j;
    std::vector<Rational> poly(static_cast<std::size_t>(order + 1), Rational(0));
    std::vector<Rational> basis{Rational(1)};  // C(n − anchor, k) in powers of n
    for (int k = 0; k <= order; ++k) {
        if (k > 0) {
            std::vector<Rational> grown(basis.size() + 1, Rational(0));
            const Rational shift = -Rational(anchor + k - 1);
            for (std::size_t t = 0; t < basis.size(); ++t) {
                grown[t + 1] += basis[t] / k;
                grown[t] += basis[t] * shift / k;
            }
            basis.swap(grown);
        }
        const Rational delta = diffs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < basis.size(); ++t) poly[t] += delta * basis[t];
    }
    while (!poly.empty() && poly.back() == 0) poly.pop_back();
    fit.monomialCoefficients = poly;
    fit.polynomialDegree = static_cast<int>(poly.size()) - 1;
    fit.dimI = fit.polynomialDegree + 1;

    std::vector<Rational> values;
    for (int k = 0; k <= std::max(fit.polynomialDegree, 0); ++k) values.push_back(fit(k));
    for (int k = 0; k <= fit.polynomialDegree; ++k) {
        fit.binomialCoefficients.push_back(values[0]);
        for (std::size_t t = 0; t + 1 < values.size(); ++t) values[t] = values[t + 1] - values[t];
        values.pop_back();
    }

    int first = len;
    while (first > 0 && fit(startDegree + first - 1) == Rational(dims[static_cast<std::size_t>(first - 1)])) --first;
    fit.stabilizationDegree = startDegree + first;
    return fit;
}

GradedSubspace sumIdealGraded(const std::vector<IdealSpec>& ideals, int n, double rankThreshold) {
    if (ideals.empty()) throw InvalidInput("sumIdealGraded: no ideals");
    const int d = ideals.front().variables();
    bool monomial = true;
    for (const auto& ideal : ideals) {
        if (ideal.variables() != d) throw InvalidInput("sumIdealGraded: ideals live in different dimensions");
        monomial = monomial && ideal.isMonomial();
    }
    if (monomial) {
        std::vector<HomogeneousPolynomial> all;
        for (const auto& ideal : ideals) all.insert(all.end(), ideal.generators().begin(), ideal.generators().end());
        return idealGradedPiece(IdealSpec(d, std::move(all)), n);
    }
    GradedSubspace acc = idealGradedPiece(ideals.front(), n, rankThreshold);
    for (std::size_t k = 1; k < ideals.size(); ++k) acc = sum(acc, idealGradedPiece(ideals[k], n, rankThreshold), rankThreshold);
    return acc;
}

GradedSubspace intersectIdealGraded(const std::vector<IdealSpec>& ideals, int n, double rankThreshold,
                                    double intersectionThreshold) {
    if (ideals.empty()) throw InvalidInput("intersectIdealGraded: no ideals");
    const int d = ideals.front().variables();
    bool monomial = true;
    std::vector<const IdealSpec*> refs;
    for (const auto& ideal : ideals) {
        if (ideal.variables() != d) throw InvalidInput("intersectIdealGraded: ideals live in different dimensions");
        monomial = monomial && ideal.isMonomial();
        refs.push_back(&ideal);
    }
    if (monomial) return monomialPiece(d, n, refs, true);
    GradedSubspace acc = idealGradedPiece(ideals.front(), n, rankThreshold);
    for (std::size_t k = 1; k < ideals.size(); ++k)
        acc = intersect(acc, idealGradedPiece(ideals[k], n, rankThreshold), intersectionThreshold);
    return acc;
}

}  // namespace dalab

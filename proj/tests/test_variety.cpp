#include "dalab/variety.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dalab;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }
HomogeneousPolynomial mono(std::vector<int> e) { return HomogeneousPolynomial::monomial(mi(std::move(e))); }

IdealSpec monomialIdeal(int d, const std::vector<oracle::Exps>& gens) {
    std::vector<HomogeneousPolynomial> g;
    for (const auto& e : gens) g.push_back(mono(e));
    return IdealSpec(d, std::move(g));
}

bool divides(const oracle::Exps& a, const oracle::Exps& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] > b[k]) return false;
    return true;
}

// number of degree-n monomials lying in every listed monomial ideal
long long countInAll(int d, int n, const std::vector<std::vector<oracle::Exps>>& ideals) {
    long long count = 0;
    for (const auto& g : oracle::allOfDegree(d, n)) {
        bool all = true;
        for (const auto& gens : ideals) {
            bool any = false;
            for (const auto& e : gens) any = any || divides(e, g);
            all = all && any;
        }
        count += all;
    }
    return count;
}

std::vector<oracle::Exps> randomMonomialGenerators(std::mt19937_64& rng, int d) {
    std::uniform_int_distribution<int> howMany(1, 3), deg(1, 3), var(0, d - 1);
    std::vector<oracle::Exps> gens;
    for (int k = howMany(rng); k > 0; --k) {
        oracle::Exps e(static_cast<std::size_t>(d), 0);
        for (int t = deg(rng); t > 0; --t) ++e[static_cast<std::size_t>(var(rng))];
        gens.push_back(e);
    }
    return gens;
}

SubspaceComponent line(Vector u) { return SubspaceComponent(Matrix(u.normalized())); }

Vector vec(std::initializer_list<Complex> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (auto x : v) out(k++) = x;
    return out;
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(IdealSpec(2, {}), InvalidInput);
    CHECK_THROWS_AS(IdealSpec(2, {HomogeneousPolynomial(2, 2)}), InvalidInput);
    CHECK_THROWS_AS(IdealSpec(2, {mono({1, 0, 0})}), InvalidInput);
    CHECK_THROWS_AS(SubspaceComponent(Matrix::Ones(2, 1)), InvalidInput);
    CHECK_THROWS_AS(VarietySpec::fromComponents({}), InvalidInput);
    Matrix plane = Matrix::Identity(3, 2);
    CHECK_THROWS_AS(VarietySpec::fromComponents({line(vec({1, 0, 0})), SubspaceComponent(plane)}), InvalidInput);
    CHECK_THROWS_AS(VarietySpec::fromComponents({line(vec({1, 0})), line(vec({0, 1, 0}))}), InvalidInput);
    CHECK_THROWS_AS(VarietySpec::fromIdeal(monomialIdeal(2, {{1, 1}})), InvalidInput);
    CHECK_NOTHROW(VarietySpec::fromIdeal(IdealSpec(2, {mono({1, 1})}, true)));
}

TEST_CASE("ideal and quotient pieces of (z1 z2)") {
    const auto ideal = monomialIdeal(2, {{1, 1}});
    CHECK(idealGradedPiece(ideal, 2).dim() == 1);
    CHECK(quotientGradedPiece(ideal, 0).dim() == 1);
    for (int n = 2; n <= 12; ++n) {
        CHECK(idealGradedPiece(ideal, n).dim() == n - 1);
        CHECK(quotientGradedPiece(ideal, n).dim() == 2);
    }
    CHECK(quotientGradedPiece(ideal, 1).dim() == 2);
}

TEST_CASE("maximal ideal and coordinate hyperplane") {
    const auto maximal = monomialIdeal(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    for (int n = 1; n <= 5; ++n) CHECK(idealGradedPiece(maximal, n).dim() == static_cast<Eigen::Index>(degreeDimension(3, n)));
    const auto z2 = monomialIdeal(2, {{0, 1}});
    for (int n = 0; n <= 5; ++n) {
        const auto f = quotientGradedPiece(z2, n);
        REQUIRE(f.dim() == 1);
        CHECK(std::abs(std::abs(f.basis()(0, 0)) - 1.0) < 1e-15);
    }
}

TEST_CASE("non-monomial generator") {
    HomogeneousPolynomial g(2, 2);
    g.add(mi({2, 0}), 1.0);
    g.add(mi({0, 2}), 1.0);
    const IdealSpec ideal(2, {g});
    CHECK(idealGradedPiece(ideal, 2).dim() == 1);
    CHECK(idealGradedPiece(ideal, 3).dim() == 2);
    CHECK(quotientGradedPiece(ideal, 7).dim() == 2);
}

TEST_CASE("dim I_n + dim F_n = dim H_n and shift invariance") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 2 + trial % 2;
        std::vector<HomogeneousPolynomial> gens;
        std::uniform_int_distribution<int> deg(1, 3);
        for (int k = 0; k < 2; ++k) {
            HomogeneousPolynomial p(d, deg(rng));
            for (const auto& a : enumerateDegree(d, p.degree())) p.add(a, oracle::randomComplex(rng));
            gens.push_back(p);
        }
        const IdealSpec ideal(d, gens);
        for (int n = 0; n <= 6; ++n) {
            const auto in = idealGradedPiece(ideal, n), fn = quotientGradedPiece(ideal, n);
            CHECK(in.dim() + fn.dim() == static_cast<Eigen::Index>(degreeDimension(d, n)));
            if (in.dim() > 0 && fn.dim() > 0) CHECK((in.basis().adjoint() * fn.basis()).cwiseAbs().maxCoeff() < 1e-10);
            const auto next = idealGradedPiece(ideal, n + 1);
            for (int i = 0; i < d; ++i) {
                const Matrix image = shiftBlock(d, i, n).matrix * in.basis();
                const Matrix escape = image - next.basis() * (next.basis().adjoint() * image);
                CHECK((escape.cols() == 0 || linalg::operatorNorm(escape) <= 1e-9));
            }
        }
    }
}

TEST_CASE("subspace powers") {
    const auto e1 = line(vec({1, 0, 0}));
    for (int n = 0; n <= 6; ++n) {
        const auto p = subspacePower(e1, n);
        REQUIRE(p.dim() == 1);
        CHECK(std::abs(std::abs(p.basis()(0, 0)) - 1.0) < 1e-14);
    }
    std::mt19937_64 rng(8);
    const Vector u = oracle::randomVector(rng, 3).normalized();
    for (int n = 0; n <= 8; ++n) {
        const Vector b = subspacePower(SubspaceComponent(Matrix(u)), n).basis().col(0);
        const Vector k = kernelCoordinates(u, n);
        CHECK(std::abs(std::abs(k.dot(b)) - 1.0) < 1e-12);
    }
    const auto plane = SubspaceComponent(oracle::randomIsometry(rng, 4, 2));
    const auto p5 = subspacePower(plane, 5);
    CHECK(p5.dim() == 6);
    CHECK(linalg::orthonormalityDefect(p5.basis()) < 1e-12);
    CHECK_THROWS_AS(SubspaceComponent(oracle::randomMatrix(rng, 3, 2)), InvalidInput);
}

TEST_CASE("variety pieces and radical consistency") {
    const auto axes = VarietySpec::fromComponents({line(vec({1, 0})), line(vec({0, 1}))});
    for (int n = 1; n <= 6; ++n) CHECK(varietyGradedPiece(axes, n).dim() == 2);
    CHECK(varietyGradedPiece(axes, 0).dim() == 1);

    const auto single = VarietySpec::fromComponents({line(vec({0.6, 0.8}))});
    CHECK(subspaceDistance(varietyGradedPiece(single, 4), subspacePower(single.components()[0], 4)) < 1e-14);

    const IdealSpec z1z2(2, {mono({1, 1})}, true);
    for (const auto& row : checkRadicalConsistency(z1z2, axes, 30)) CHECK(row.distance <= 1e-8);
    const auto viaIdeal = VarietySpec::fromIdeal(z1z2);
    CHECK(subspaceDistance(varietyGradedPiece(viaIdeal, 5), varietyGradedPiece(axes, 5)) <= 1e-8);

    const IdealSpec z1sq(2, {mono({2, 0})}, true);
    const auto z1zero = VarietySpec::fromComponents({line(vec({0, 1}))});
    const auto rows = checkRadicalConsistency(z1sq, z1zero, 3);
    CHECK(rows[1].quotientDim == 2);
    CHECK(rows[1].varietyDim == 1);
    CHECK(rows[1].distance > 0.5);
    for (const auto& row : checkRadicalConsistency(IdealSpec(2, {mono({1, 0})}, true), z1zero, 5)) CHECK(row.distance < 1e-14);
}

TEST_CASE("non-monomial ideal of a union of lines agrees with the component route") {
    // z1² − z2² vanishes on the lines through (1,1) and (1,−1)
    HomogeneousPolynomial g(2, 2);
    g.add(mi({2, 0}), 1.0);
    g.add(mi({0, 2}), -1.0);
    const IdealSpec ideal(2, {g}, true);
    const auto lines = VarietySpec::fromComponents({line(vec({1, 1})), line(vec({1, -1}))});
    for (const auto& row : checkRadicalConsistency(ideal, lines, 15)) CHECK(row.distance < 1e-8);

    // complex line through (1, i) is cut out by z2 − i z1
    HomogeneousPolynomial h(2, 1);
    h.add(mi({0, 1}), 1.0);
    h.add(mi({1, 0}), Complex(0, -1));
    const auto complexLine = VarietySpec::fromComponents({line(vec({1, Complex(0, 1)}))});
    for (const auto& row : checkRadicalConsistency(IdealSpec(2, {h}, true), complexLine, 10)) CHECK(row.distance < 1e-8);
}

TEST_CASE("hilbert dimensions and polynomial fit") {
    const auto axes = VarietySpec::fromComponents({line(vec({1, 0})), line(vec({0, 1}))});
    const auto dims = hilbertDimensions(axes, 0, 8);
    CHECK(dims == std::vector<long long>{1, 2, 2, 2, 2, 2, 2, 2, 2});
    const auto fit = hilbertPolynomialFit(dims);
    CHECK(fit.polynomialDegree == 0);
    CHECK(fit.dimI == 1);
    CHECK(fit(100) == 2);
    CHECK(fit.stabilizationDegree == 1);

    const auto fit6 = hilbertPolynomialFit({1, 2, 2, 2, 2, 2});
    CHECK(fit6.dimI == 1);
    CHECK(fit6.binomialCoefficients == std::vector<Rational>{2});

    const auto fullDims = hilbertDimensions(IdealSpec(2, {mono({3, 3})}), 0, 3);
    CHECK(fullDims == std::vector<long long>{1, 2, 3, 4});
    const auto full = hilbertPolynomialFit(fullDims);
    CHECK(full.dimI == 2);
    CHECK(full.monomialCoefficients == std::vector<Rational>{1, 1});
    CHECK(full.binomialCoefficients == std::vector<Rational>{1, 1});

    std::vector<long long> three;
    for (int n = 0; n <= 6; ++n) three.push_back(static_cast<long long>(degreeDimension(3, n)));
    const auto fit3 = hilbertPolynomialFit(three);
    CHECK(fit3.dimI == 3);
    CHECK(fit3.binomialCoefficients == std::vector<Rational>{1, 2, 1});
    CHECK(fit3.stabilizationDegree == 0);

    const auto zero = hilbertPolynomialFit({1, 0, 0, 0, 0});
    CHECK(zero.isZero());
    CHECK(zero.dimI == 0);
    CHECK(zero.stabilizationDegree == 1);

    // started at n = 3, ideal (z1 z2 z3) in d=3: h(n) = 3n for n ≥ 1
    const auto tail = hilbertDimensions(IdealSpec(3, {mono({1, 1, 1})}), 3, 9);
    const auto fitTail = hilbertPolynomialFit(tail, 3);
    CHECK(fitTail.dimI == 2);
    for (int n = 3; n <= 9; ++n) CHECK(fitTail(n) == tail[static_cast<std::size_t>(n - 3)]);
    CHECK(fitTail(0) == 0);

    CHECK_THROWS_AS(hilbertPolynomialFit({1, 2, 4, 8, 16}), NumericalFailure);
    CHECK_THROWS_AS(hilbertPolynomialFit({1, 2}), NumericalFailure);
}

TEST_CASE("graded sums and intersections of ideals") {
    const auto i1 = monomialIdeal(2, {{1, 0}}), i2 = monomialIdeal(2, {{0, 1}});
    CHECK(sumIdealGraded({i1, i2}, 1).dim() == 2);
    const auto cap = intersectIdealGraded({i1, i2}, 2);
    REQUIRE(cap.dim() == 1);
    CHECK(std::abs(std::abs(cap.basis()(1, 0)) - 1.0) < 1e-15);

    const auto big = monomialIdeal(2, {{1, 0}}), small = monomialIdeal(2, {{2, 1}});
    CHECK(subspaceDistance(sumIdealGraded({big, small}, 4), idealGradedPiece(big, 4)) < 1e-14);
    CHECK(subspaceDistance(intersectIdealGraded({big, small}, 4), idealGradedPiece(small, 4)) < 1e-14);
    CHECK(subspaceDistance(sumIdealGraded({big}, 3), idealGradedPiece(big, 3)) < 1e-14);
    CHECK(subspaceDistance(intersectIdealGraded({big}, 3), idealGradedPiece(big, 3)) < 1e-14);

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + trial % 2;
        const auto g1 = randomMonomialGenerators(rng, d), g2 = randomMonomialGenerators(rng, d);
        const auto a = monomialIdeal(d, g1), b = monomialIdeal(d, g2);
        for (int n = 0; n <= 8; ++n) {
            const auto s = sumIdealGraded({a, b}, n), c = intersectIdealGraded({a, b}, n);
            const long long sumRef = countInAll(d, n, {[&] {
                auto all = g1;
                all.insert(all.end(), g2.begin(), g2.end());
                return all;
            }()});
            CHECK(s.dim() == sumRef);
            CHECK(c.dim() == countInAll(d, n, {g1, g2}));
            // the generic numerical route agrees with the exact one
            const auto pa = idealGradedPiece(a, n), pb = idealGradedPiece(b, n);
            CHECK(sum(pa, pb).dim() == s.dim());
            CHECK(intersect(pa, pb).dim() == c.dim());
        }
    }
}

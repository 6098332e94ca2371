#include "dalab/geometry.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dalab;

namespace {

Matrix cols(std::initializer_list<std::initializer_list<Complex>> columns, int rows) {
    Matrix m(rows, static_cast<Eigen::Index>(columns.size()));
    Eigen::Index c = 0;
    for (const auto& col : columns) {
        Eigen::Index r = 0;
        for (auto x : col) m(r++, c) = x;
        ++c;
    }
    return m;
}

GradedSubspace sub(const Matrix& spanning) { return GradedSubspace::span(1, spanning.rows(), spanning, 1e-10); }

// unit vectors whose Gram matrix is g
std::vector<SubspaceComponent> linesWithGram(const Matrix& g) {
    const Matrix r = g.llt().matrixU();
    std::vector<SubspaceComponent> out;
    for (Eigen::Index k = 0; k < r.cols(); ++k) out.emplace_back(Matrix(r.col(k)));
    return out;
}

Matrix twoLineGram(double c) {
    Matrix g(2, 2);
    g << 1, c, c, 1;
    return g;
}

}  // namespace

TEST_CASE("intersect") {
    const double s = 1 / std::sqrt(2.0);
    const auto m = sub(cols({{1, 0, 0}, {0, s, s}}, 3));
    CHECK(subspaceDistance(intersect(m, m), m) < 1e-12);
    CHECK(intersect(sub(cols({{1, 0}}, 2)), sub(cols({{0, 1}}, 2))).dim() == 0);
    const auto cap = intersect(sub(cols({{1, 0, 0}, {0, 1, 0}}, 3)), sub(cols({{0, 1, 0}, {0, 0, 1}}, 3)));
    REQUIRE(cap.dim() == 1);
    CHECK(std::abs(std::abs(cap.basis()(1, 0)) - 1.0) < 1e-12);
}

TEST_CASE("friedrichsCos examples") {
    std::mt19937_64 rng(2);
    const Vector u = oracle::randomVector(rng, 3).normalized(), v = oracle::randomVector(rng, 3).normalized();
    CHECK(friedrichsCos(sub(u), sub(v)) == doctest::Approx(std::abs(u.dot(v))).epsilon(1e-12));
    CHECK(friedrichsCos(sub(cols({{1, 0, 0}}, 3)), sub(cols({{1, 0, 0}, {0, 1, 0}}, 3))) == 0.0);
    const double s = 1 / std::sqrt(2.0);
    const auto m = sub(cols({{1, 0, 0}, {0, s, s}}, 3));
    const auto n = sub(cols({{1, 0, 0}, {0, 0, 1}}, 3));
    CHECK(friedrichsCos(m, n) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("friedrichsCos symmetric and unitarily invariant; dimension split") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const int amb = 5;
        const Matrix shared = oracle::randomMatrix(rng, amb, trial % 2);
        Matrix a(amb, 2 + trial % 2), b(amb, 2);
        a << shared, oracle::randomMatrix(rng, amb, a.cols() - shared.cols());
        b << shared, oracle::randomMatrix(rng, amb, b.cols() - shared.cols());
        const auto m = sub(a), n = sub(b);
        const double c1 = friedrichsCos(m, n), c2 = friedrichsCos(n, m);
        CHECK(std::abs(c1 - c2) < 1e-10);
        CHECK(c1 >= 0.0);
        CHECK(c1 <= 1.0);
        const Matrix w = oracle::randomIsometry(rng, amb, amb);
        CHECK(std::abs(friedrichsCos(sub(w * a), sub(w * b)) - c1) < 1e-10);
        const auto cap = intersect(m, n);
        CHECK(cap.dim() == shared.cols());
        CHECK(m.dim() == cap.dim() + relativeComplement(m, cap).dim());
    }
}

TEST_CASE("maxPairwiseCos") {
    CHECK(maxPairwiseCos(std::vector<SubspaceComponent>{SubspaceComponent(cols({{1, 0, 0}}, 3)),
                                                         SubspaceComponent(cols({{0, 1, 0}, {0, 0, 1}}, 3))}) == 0.0);
    const double s = 1 / std::sqrt(2.0);
    CHECK(maxPairwiseCos(std::vector<SubspaceComponent>{SubspaceComponent(cols({{1, 0}}, 2)),
                                                         SubspaceComponent(cols({{s, s}}, 2))}) ==
          doctest::Approx(s).epsilon(1e-12));
    Matrix g(3, 3);
    g << 1, 0.3, 0.5, 0.3, 1, 0.2, 0.5, 0.2, 1;
    CHECK(maxPairwiseCos(linesWithGram(g)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(maxPairwiseCos(std::vector<GradedSubspace>{sub(cols({{1, 0}}, 2))}), InvalidInput);
}

TEST_CASE("tensor angle decay") {
    for (double c : {0.3, 0.6, 0.7, 0.95}) {
        const auto table = tensorAngleDecay(linesWithGram(twoLineGram(c)), 40);
        CHECK(table.pass);
        for (const auto& row : table.rows) {
            CHECK(std::abs(row.cos - std::pow(c, row.power)) <= 1e-10);
            CHECK(row.cos <= row.globalBound + 1e-9);
        }
        CHECK(table.c == doctest::Approx(c).epsilon(1e-12));
    }
    const auto c07 = tensorAngleDecay(linesWithGram(twoLineGram(0.7)), 10);
    CHECK(c07.rows.back().cos <= std::pow(0.7, 10) + 1e-9);

    const auto planes = tensorAngleDecay(
        {SubspaceComponent(cols({{1, 0, 0, 0}, {0, 1, 0, 0}}, 4)), SubspaceComponent(cols({{0, 0, 1, 0}, {0, 0, 0, 1}}, 4))},
        6);
    for (const auto& row : planes.rows) CHECK(row.cos < 1e-12);

    // planes in general position in C^4: the power law holds for the pair cosine itself
    std::mt19937_64 rng(9);
    const std::vector<SubspaceComponent> generic{SubspaceComponent(oracle::randomIsometry(rng, 4, 2)),
                                                 SubspaceComponent(oracle::randomIsometry(rng, 4, 2))};
    const auto table = tensorAngleDecay(generic, 8);
    CHECK(table.pass);
    for (const auto& row : table.rows) CHECK(std::abs(row.cos - row.pairBound) < 1e-10);

    CHECK_THROWS_WITH_AS(tensorAngleDecay({SubspaceComponent(cols({{1, 0, 0}, {0, 1, 0}}, 3)),
                                           SubspaceComponent(cols({{0, 1, 0}, {0, 0, 1}}, 3))},
                                          3),
                         doctest::Contains("disjoint-spans precondition violated"), InvalidInput);
}

TEST_CASE("component decomposition") {
    const double c = 0.6;
    const auto lines = linesWithGram(twoLineGram(c));
    for (int n = 1; n <= 12; ++n) {
        const auto p1 = subspacePower(lines[0], n), p2 = subspacePower(lines[1], n);
        const Vector a = p1.basis().col(0), b = p2.basis().col(0);
        const auto only = componentDecomposition(a, {p1, p2}, c);
        CHECK((only.parts[0] - a).norm() < 1e-9);
        CHECK(only.parts[1].norm() < 1e-9);

        const auto both = componentDecomposition(a + 2.0 * b, {p1, p2}, c);
        CHECK((both.parts[0] - a).norm() < 1e-9);
        CHECK((both.parts[1] - 2.0 * b).norm() < 1e-9);
        if (both.applicable) {
            CHECK(both.lowerHolds);
            CHECK(both.upperHolds);
        }
    }
    const auto same = subspacePower(lines[0], 2);
    CHECK_THROWS_AS(componentDecomposition(same.basis().col(0), {same, same}, c), NumericalFailure);
    const auto p1 = subspacePower(lines[0], 3), p2 = subspacePower(lines[1], 3);
    CHECK_THROWS_AS(componentDecomposition(Vector::Ones(p1.ambientDim()), {p1, p2}, c), InvalidInput);
}

TEST_CASE("est-V sampled on generic configurations") {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 3 + trial % 2, k = 2 + trial % 2;
        std::vector<SubspaceComponent> comps;
        for (int i = 0; i < k; ++i) comps.emplace_back(Matrix(oracle::randomVector(rng, d).normalized()));
        const double c = maxPairwiseCos(comps);
        for (int n = 1; n <= 15; ++n) {
            std::vector<GradedSubspace> pieces;
            for (const auto& comp : comps) pieces.push_back(subspacePower(comp, n));
            for (int s = 0; s < 5; ++s) {
                Vector v = Vector::Zero(pieces.front().ambientDim());
                for (const auto& p : pieces) v += p.basis() * oracle::randomVector(rng, static_cast<int>(p.dim()));
                const auto r = componentDecomposition(v, pieces, c);
                if (!r.applicable || k * (k - 1) * std::pow(c, n) > 1.0) continue;
                ++checked;
                CHECK(r.lowerHolds);
                CHECK(r.upperHolds);
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("est-V upper side can fail where only 1 - k c^n > 0") {
    // three lines with pairwise inner product -0.3: at n = 1 the sum of the
    // component norms exceeds (1 + 3c)‖v‖² for v along the small Gram direction
    Matrix g(3, 3);
    g << 1, -0.3, -0.3, -0.3, 1, -0.3, -0.3, -0.3, 1;
    const auto lines = linesWithGram(g);
    std::vector<GradedSubspace> pieces;
    for (const auto& l : lines) pieces.push_back(subspacePower(l, 1));
    const Vector v = pieces[0].basis().col(0) + pieces[1].basis().col(0) + pieces[2].basis().col(0);
    const auto r = componentDecomposition(v, pieces, 0.3);
    CHECK(r.applicable);
    CHECK(r.lowerHolds);
    CHECK_FALSE(r.upperHolds);
    CHECK(r.partsSquared == doctest::Approx(r.normSquared / (1 - 2 * 0.3)).epsilon(1e-10));
}

TEST_CASE("closedness witness") {
    const auto orth = closednessWitness(
        {SubspaceComponent(cols({{1, 0, 0}}, 3)), SubspaceComponent(cols({{0, 1, 0}, {0, 0, 1}}, 3))}, 8);
    for (const auto& row : orth.rows)
        if (row.degree > 0) CHECK(std::abs(row.sigmaMin - 1.0) < 1e-12);
    CHECK(orth.pass);

    for (double c : {0.2, 0.6, 0.9}) {
        const auto rep = closednessWitness(linesWithGram(twoLineGram(c)), 40);
        CHECK(rep.pass);
        for (const auto& row : rep.rows)
            if (row.degree > 0) CHECK(std::abs(row.sigmaMin - std::sqrt(1 - std::pow(c, row.degree))) < 1e-9);
    }

    std::mt19937_64 rng(12);
    std::vector<SubspaceComponent> three;
    for (int i = 0; i < 3; ++i) three.emplace_back(Matrix(oracle::randomVector(rng, 3).normalized()));
    CHECK(closednessWitness(three, 40).pass);

    // adding a component never raises sigma_min
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<SubspaceComponent> comps;
        for (int i = 0; i < 2; ++i) comps.emplace_back(Matrix(oracle::randomVector(rng, 4).normalized()));
        const auto before = closednessWitness(comps, 10);
        comps.emplace_back(Matrix(oracle::randomVector(rng, 4).normalized()));
        const auto after = closednessWitness(comps, 10);
        for (std::size_t n = 0; n < before.rows.size(); ++n) CHECK(after.rows[n].sigmaMin <= before.rows[n].sigmaMin + 1e-12);
    }
}

TEST_CASE("subspace sum check") {
    const auto l = SubspaceComponent(cols({{0.6, 0.8, 0}}, 3));
    const auto twice = subspaceSumCheck({l, l}, 10);
    for (const auto& row : twice.rows) {
        CHECK(row.rank == 1);
        CHECK(std::abs(row.sigmaMin - std::sqrt(2.0)) < 1e-12);
        CHECK(std::abs(row.ratio - 1.0) < 1e-12);
    }
    const auto orth = subspaceSumCheck({SubspaceComponent(cols({{1, 0, 0}}, 3)), SubspaceComponent(cols({{0, 1, 0}}, 3))}, 10);
    for (const auto& row : orth.rows)
        if (row.degree > 0) CHECK(std::abs(row.sigmaMin - 1.0) < 1e-12);

    const double s = 1 / std::sqrt(2.0);
    const auto planes = subspaceSumCheck(
        {SubspaceComponent(cols({{1, 0, 0}, {0, 1, 0}}, 3)), SubspaceComponent(cols({{0, s, s}, {1, 0, 0}}, 3))}, 40);
    // two unit-norm pieces: σ_max ≤ √2 at every degree; the floor sits at
    // 2·sin(π/8) from degree 1 on
    for (const auto& row : planes.rows) {
        CHECK(row.sigmaMax <= std::sqrt(2.0) + 1e-12);
        if (row.degree > 0) CHECK(std::abs(row.sigmaMin - planes.rows[1].sigmaMin) < 1e-10);
    }
    CHECK(planes.floor > 0.5);
}

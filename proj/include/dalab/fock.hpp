#pragma once

// Weighted monomial model of the Drury–Arveson space H²_d.
//
// Degree-n monomials z^α (|α| = n) are ordered graded-lexicographically:
// within a degree, exponent tuples are sorted in descending lexicographic
// order, so for d = 2, n = 2 the basis is z₁², z₁z₂, z₂². Every dense vector
// or OperatorBlock in this library is expressed in the orthonormal basis
// ε_α = z^α / ‖z^α‖ with ‖z^α‖² = α!/|α|!. Raw monomial coefficients appear
// only inside HomogeneousPolynomial. Variable indices are 0-based.

#include "dalab/core.hpp"
#include "dalab/linalg.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

namespace dalab {

using Rational = boost::multiprecision::cpp_rational;
using Point = Vector;

class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);

    static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(d), 0)); }
    static MultiIndex unit(int d, int i);

    int variables() const { return static_cast<int>(exponents_.size()); }
    int degree() const { return degree_; }
    int operator[](int i) const { return exponents_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& exponents() const { return exponents_; }

    MultiIndex operator+(const MultiIndex& other) const;
    // Componentwise difference; throws InvalidInput if any entry goes negative.
    MultiIndex operator-(const MultiIndex& other) const;
    bool divides(const MultiIndex& other) const;

    bool operator==(const MultiIndex& other) const { return exponents_ == other.exponents_; }

private:
    std::vector<int> exponents_;
    int degree_ = 0;
};

/// Strict weak order matching the basis order: by degree, then descending
/// lexicographic order of the exponent tuple.
struct BasisOrder {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// binomial(n + d - 1, d - 1); throws ScaleGuard on 64-bit overflow.
std::uint64_t degreeDimension(int d, int n);

/// Exact binomial coefficient with overflow detection.
std::uint64_t binomial(int n, int k);

/// All degree-n multi-indices in d variables, in basis order.
std::vector<MultiIndex> enumerateDegree(int d, int n);

/// Position of α inside enumerateDegree(α.variables(), α.degree()).
std::size_t basisRank(const MultiIndex& alpha);

/// ‖z^α‖² = α₁!⋯α_d!/|α|!, exact.
Rational monomialNormSquared(const MultiIndex& alpha);

/// Floating-point value of monomialNormSquared, computed as a product of
/// binomial ratios (relative error a few ulps).
double monomialNormSquaredValue(const MultiIndex& alpha);

/// sqrt(monomialNormSquaredValue) for every index of degree n, in basis order.
RealVector monomialNorms(int d, int n);

class HomogeneousPolynomial {
public:
    using Terms = std::map<MultiIndex, Complex, BasisOrder>;

    HomogeneousPolynomial(int d, int degree);

    static HomogeneousPolynomial monomial(const MultiIndex& alpha, Complex coefficient = 1.0);
    /// Polynomial whose ε_α-coordinates are `coordinates` (basis order).
    static HomogeneousPolynomial fromCoordinates(int d, int degree, const Vector& coordinates);

    int variables() const { return d_; }
    int degree() const { return degree_; }
    const Terms& terms() const { return terms_; }
    bool isZero() const { return terms_.empty(); }
    bool isMonomial() const { return terms_.size() == 1; }

    Complex coefficient(const MultiIndex& alpha) const;
    /// Adds c·z^α; α must have matching dimension and degree. Exact zeros are dropped.
    void add(const MultiIndex& alpha, Complex c);

    /// Coordinates in the orthonormal basis {ε_α} of H_n.
    Vector coordinates() const;

    HomogeneousPolynomial operator*(const HomogeneousPolynomial& other) const;
    HomogeneousPolynomial operator+(const HomogeneousPolynomial& other) const;
    HomogeneousPolynomial scaled(Complex s) const;

private:
    int d_;
    int degree_;
    Terms terms_;
};

/// Drury–Arveson inner product; 0 for different degrees. Throws InvalidInput
/// on mismatched variable counts.
Complex innerProduct(const HomogeneousPolynomial& p, const HomogeneousPolynomial& q);

struct OperatorBlock {
    int sourceDegree = 0;
    int targetDegree = 0;
    Matrix matrix;  // rows: target basis, columns: source basis
};

/// Block of S_i : H_n → H_{n+1}; S_i ε_α = sqrt((α_i+1)/(n+1)) ε_{α+e_i}.
OperatorBlock shiftBlock(int d, int i, int n);
SparseMatrix shiftSparse(int d, int i, int n);

/// Block of [S_i*, S_j] on H_n.
OperatorBlock fullCommutatorBlock(int d, int i, int j, int n);
SparseMatrix fullCommutatorSparse(int d, int i, int j, int n);

/// Degree-n piece of k_λ, the polynomial ⟨z, λ⟩ⁿ.
HomogeneousPolynomial kernelVector(const Point& lambda, int n);
/// Its ε-coordinates: sqrt(n!/α!)·conj(λ)^α.
Vector kernelCoordinates(const Point& lambda, int n);

/// Σ p_α z^α.
Complex evaluate(const HomogeneousPolynomial& p, const Point& z);

/// The polynomial z ↦ p(Bz). B is p.variables() × d; the result lives in d
/// variables. Exact term-by-term expansion.
HomogeneousPolynomial composeLinear(const HomogeneousPolynomial& p, const Matrix& b);

/// Composition q ↦ q∘B acting on ε-coordinate vectors of a fixed degree.
/// Evaluates by a multivariate Horner scheme, so one application costs about
/// binomial(n + d_in + d_out − 1, n) multiply-adds regardless of sparsity.
class LinearComposer {
public:
    LinearComposer(Matrix b, int degree);

    int inputVariables() const { return static_cast<int>(b_.rows()); }
    int outputVariables() const { return static_cast<int>(b_.cols()); }
    int degree() const { return degree_; }

    Vector apply(const Vector& coordinates) const;
    Matrix apply(const Matrix& columns) const;

    /// Images of every ε_γ (γ ∈ H_n(d_in)) as columns, in basis order.
    Matrix monomialImages() const;

private:
    void horner(int depth, int minVar, std::vector<int>& alpha, const std::vector<Complex>& raw,
                std::vector<std::vector<Complex>>& buffers) const;
    void multiplyLinear(const std::vector<Complex>& in, int inDegree, int inputVar,
                        std::vector<Complex>& out) const;

    Matrix b_;
    int degree_;
    std::vector<std::vector<std::uint32_t>> successors_;  // per output degree e < n
    std::vector<std::size_t> outputDims_;
    RealVector inputNorms_;
    RealVector outputNorms_;
};

}  // namespace dalab

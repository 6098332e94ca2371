#pragma once

// Homogeneous ideals and unions of linear subspaces as graded objects.

#include "dalab/fock.hpp"
#include "dalab/subspace.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace dalab {

class IdealSpec {
public:
    /// Throws InvalidInput on an empty generator list, a zero generator, or a
    /// generator in the wrong number of variables.
    IdealSpec(int d, std::vector<HomogeneousPolynomial> generators, bool radical = false);

    int variables() const { return d_; }
    const std::vector<HomogeneousPolynomial>& generators() const { return generators_; }
    bool radical() const { return radical_; }
    bool isMonomial() const;

private:
    int d_;
    std::vector<HomogeneousPolynomial> generators_;
    bool radical_;
};

/// L = span(B) ⊆ C^d for an isometry B (d × m).
class SubspaceComponent {
public:
    explicit SubspaceComponent(Matrix basis, double tolerance = 1e-12);
    /// Orthonormalizes arbitrary spanning columns first.
    static SubspaceComponent spannedBy(const Matrix& columns, double rankThreshold = 1e-10);

    int ambient() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Matrix& basis() const { return basis_; }

private:
    Matrix basis_;
};

class VarietySpec {
public:
    /// Rejects empty lists, mixed ambient dimensions and components contained
    /// in another one (within `containmentTolerance`).
    static VarietySpec fromComponents(std::vector<SubspaceComponent> components, double containmentTolerance = 1e-8);
    /// The ideal must carry the radical flag.
    static VarietySpec fromIdeal(IdealSpec ideal);

    int variables() const;
    bool hasComponents() const { return std::holds_alternative<std::vector<SubspaceComponent>>(data_); }
    const std::vector<SubspaceComponent>& components() const { return std::get<std::vector<SubspaceComponent>>(data_); }
    const IdealSpec& ideal() const { return std::get<IdealSpec>(data_); }

private:
    explicit VarietySpec(std::variant<std::vector<SubspaceComponent>, IdealSpec> data) : data_(std::move(data)) {}
    std::variant<std::vector<SubspaceComponent>, IdealSpec> data_;
};

/// I_n. Monomial generators give an exact basis of unit vectors ε_γ.
GradedSubspace idealGradedPiece(const IdealSpec& ideal, int n, double rankThreshold = 1e-10);
/// F_n = H_n ⊖ I_n.
GradedSubspace quotientGradedPiece(const IdealSpec& ideal, int n, double rankThreshold = 1e-10);

/// L^n: images of the orthonormal basis of H_n(m) under q ↦ q∘Bᴴ.
GradedSubspace subspacePower(const SubspaceComponent& component, int n);
/// V^n = Σ V_i^n for component lists; F_n for ideal specs.
GradedSubspace varietyGradedPiece(const VarietySpec& variety, int n, double rankThreshold = 1e-10);

struct RadicalConsistencyRow {
    int degree = 0;
    Eigen::Index quotientDim = 0;
    Eigen::Index varietyDim = 0;
    double distance = 0.0;
};
std::vector<RadicalConsistencyRow> checkRadicalConsistency(const IdealSpec& ideal, const VarietySpec& variety, int nMax,
                                                           double rankThreshold = 1e-10);

/// dim F_n (or dim V^n) for n in [nFrom, nTo].
std::vector<long long> hilbertDimensions(const IdealSpec& ideal, int nFrom, int nTo, double rankThreshold = 1e-10);
std::vector<long long> hilbertDimensions(const VarietySpec& variety, int nFrom, int nTo, double rankThreshold = 1e-10);

struct HilbertFit {
    int startDegree = 0;
    /// h(n) = Σ_k binomialCoefficients[k]·C(n, k); integers for integer-valued h.
    std::vector<Rational> binomialCoefficients;
    /// h(n) = Σ_k monomialCoefficients[k]·n^k.
    std::vector<Rational> monomialCoefficients;
    int polynomialDegree = -1;  // -1 for h = 0
    int dimI = 0;
    /// Smallest supplied degree from which the data agree with h.
    int stabilizationDegree = 0;

    Rational operator()(long long n) const;
    bool isZero() const { return polynomialDegree < 0; }
};

/// Exact finite-difference fit of dims at degrees startDegree, startDegree+1, …
/// Throws NumericalFailure ("insufficient degree range") when no difference
/// order is constant over the last three supplied degrees.
HilbertFit hilbertPolynomialFit(const std::vector<long long>& dims, int startDegree = 0);

/// (I₁ + … + I_k)_n and (I₁ ∩ … ∩ I_k)_n.
GradedSubspace sumIdealGraded(const std::vector<IdealSpec>& ideals, int n, double rankThreshold = 1e-10);
GradedSubspace intersectIdealGraded(const std::vector<IdealSpec>& ideals, int n, double rankThreshold = 1e-10,
                                    double intersectionThreshold = 1e-8);

}  // namespace dalab

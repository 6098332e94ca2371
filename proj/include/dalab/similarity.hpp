#pragma once

// The graded map Ã f = f∘A* from F_V to F_W, its polar data, intertwining
// residuals and the orthogonal model of a union of subspaces.

#include "dalab/geometry.hpp"
#include "dalab/variety.hpp"

#include <optional>
#include <vector>

namespace dalab {

/// A : C^d → C^{d'} with matched component lists, A(V_i) = W_i.
class LinearMapSpec {
public:
    /// Throws InvalidInput on shape mismatches, unequal component counts or a
    /// restriction A|span(V_i) that is not isometric to `isometryTolerance`.
    LinearMapSpec(Matrix a, VarietySpec source, VarietySpec target, double isometryTolerance = 1e-10);

    const Matrix& matrix() const { return a_; }
    const VarietySpec& source() const { return source_; }
    const VarietySpec& target() const { return target_; }
    int sourceDim() const { return static_cast<int>(a_.cols()); }
    int targetDim() const { return static_cast<int>(a_.rows()); }
    int components() const { return static_cast<int>(source_.components().size()); }

private:
    Matrix a_;
    VarietySpec source_;
    VarietySpec target_;
};

struct SimilarityBlock {
    GradedSubspace source;  // V^n
    GradedSubspace target;  // W^n
    OperatorBlock block;    // Ã_n in these bases
    double escape = 0.0;    // ‖image − P_W image‖ (operator norm)
};

/// Ã_n : V^n → W^n. Throws NumericalFailure ("image escapes target graded
/// piece") when the images leave W^n by more than `tolerance`.
SimilarityBlock gradedSimilarityBlock(const LinearMapSpec& spec, int n, double tolerance = 1e-9,
                                      double rankThreshold = 1e-10);

/// Blocks for degrees 0 … N+1, computed once.
class SimilarityModel {
public:
    SimilarityModel(const LinearMapSpec& spec, int maxDegree, double tolerance = 1e-9, double rankThreshold = 1e-10,
                    int threads = 1);

    const LinearMapSpec& spec() const { return spec_; }
    int maxDegree() const { return maxDegree_; }
    const SimilarityBlock& at(int n) const;

private:
    LinearMapSpec spec_;
    int maxDegree_;
    std::vector<SimilarityBlock> blocks_;
};

/// ‖Ã_n·(coordinates of λⁿ in V^n) − (coordinates of (Aλ)ⁿ)‖ in H_n(d').
/// λ must lie on a source component (InvalidInput otherwise).
double kernelActionCheck(const LinearMapSpec& spec, const Point& lambda, int n, double tolerance = 1e-10);

/// Block of the compressed multiplier M_g : X^n → X^{n+1} for a linear g
/// with coefficient vector `g` (g(z) = Σ g_k z_k).
Matrix linearMultiplierBlock(const Vector& g, const GradedSubspace& from, const GradedSubspace& to);

/// Coefficients of g∘A* (d' variables) and f∘A (d variables).
Vector composeWithAdjoint(const Vector& g, const Matrix& a);
Vector composeWithMap(const Vector& f, const Matrix& a);

/// ‖Ã_{n+1} M^V_g − M^W_{g∘A*} Ã_n‖, g linear in d variables.
double intertwinerResidual(const SimilarityModel& model, const Vector& g, int n);
/// ‖(M^W_f)ᴴ Ã_{n+1} − Ã_n (M^V_{f∘A})ᴴ‖, f linear in d' variables.
double adjointIntertwinerResidual(const SimilarityModel& model, const Vector& f, int n);

struct TransportRow {
    int degree = 0;
    bool skipped = false;  // Ã_n not numerically invertible
    double sigmaMin = 0.0;
    double condition = 0.0;
    double residual = 0.0;  // Frobenius
    double relative = 0.0;  // residual / ‖left side‖
};

/// [M*_{f∘A*}, M_{g∘A*}] on W^n against Ã_n [M*_{f∘A*A}, M_g] Ã_n⁻¹ on V^n, for
/// f, g linear in d variables. Degrees with σ_min(Ã_n) < invertibility are
/// skipped; n must satisfy 1 ≤ n ≤ N.
TransportRow conjugationTransportCheck(const SimilarityModel& model, const Vector& f, const Vector& g, int n,
                                       double invertibility = 1e-6);

struct PolarRow {
    int degree = 0;
    RealVector singularValues;  // zero-padded to dim V^n
    double maxDeviation = 0.0;
    double deviationSum = 0.0;
    double partialSum = 0.0;
    double envelope = 0.0;  // M cⁿ with the fitted M
    bool estApplicable = false;
    bool est2Holds = true;
    bool est3Holds = true;
    bool invertible = false;
};

struct PolarReport {
    double c = 0.0;
    int k = 0;
    double fittedM = 0.0;
    std::vector<PolarRow> rows;
    double tailBound = 0.0;  // Σ_{n>N} n^{d−1} M cⁿ
    bool tailFinite = false;
    std::optional<int> firstInvertibleDegree;
    int zeroSingularValues = 0;  // total over degrees, the finite-rank defect of U
    bool est2Holds = true;
    bool est3Holds = true;
};

/// Throws NumericalFailure ("angle degeneracy") if c ≥ 1 and InvalidInput
/// when target spans meet.
PolarReport polarAnalysis(const SimilarityModel& model, double invertibility = 1e-6, double tolerance = 1e-9);

struct OrthogonalModel {
    int D = 0;
    std::vector<SubspaceComponent> kComponents;  // coordinate blocks of C^D
    Matrix a;                                    // C^D → C^d, K_j onto L_j isometrically
    std::vector<int> offsets;                    // first coordinate of each block
    LinearMapSpec spec;                          // source K, target L
};

OrthogonalModel orthogonalModelBuilder(const std::vector<SubspaceComponent>& components,
                                       double intersectionThreshold = 1e-8);

/// Largest entrywise deviation, over degrees 2 … N and all pairs (i, j), of
/// the [T_i*, T_j] blocks of F_K from the direct sum of full-space commutators
/// of the coordinate blocks.
double decoupledCommutatorResidual(const OrthogonalModel& model, int maxDegree, int threads = 1);

}  // namespace dalab

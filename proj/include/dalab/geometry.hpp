#pragma once

// Friedrichs angles, tensor-power angle decay and closedness witnesses.

#include "dalab/subspace.hpp"
#include "dalab/variety.hpp"

#include <vector>

namespace dalab {

/// span(L) ⊆ C^d as a subspace of H_1 (the coordinate order of H_1 is z_1, …, z_d).
GradedSubspace spanOf(const SubspaceComponent& component);

/// Friedrichs cosine: largest singular value between M ⊖ (M∩N) and
/// N ⊖ (M∩N); 0 when either is trivial.
double friedrichsCos(const GradedSubspace& m, const GradedSubspace& n, double intersectionThreshold = 1e-8,
                     double rankThreshold = 1e-10);

struct PairAngle {
    int first = 0;
    int second = 0;
    double cos = 0.0;
    Eigen::Index intersectionDim = 0;
};

struct AngleReport {
    std::vector<PairAngle> pairs;
    double maxCos = 0.0;
    bool allIntersectionsZero = true;
};

AngleReport pairwiseAngles(const std::vector<GradedSubspace>& pieces, double intersectionThreshold = 1e-8);
/// c = max over unordered pairs; needs at least two pieces.
double maxPairwiseCos(const std::vector<GradedSubspace>& pieces, double intersectionThreshold = 1e-8);
double maxPairwiseCos(const std::vector<SubspaceComponent>& components, double intersectionThreshold = 1e-8);

/// Throws InvalidInput ("disjoint-spans precondition violated") if two
/// component spans meet nontrivially.
void requireDisjointSpans(const std::vector<SubspaceComponent>& components, double intersectionThreshold = 1e-8);

struct TensorAngleRow {
    int first = 0;
    int second = 0;
    int power = 0;
    double cos = 0.0;
    double pairBound = 0.0;    // cos(L_i, L_j)^k
    double globalBound = 0.0;  // c^k
    bool pass = false;         // cos ≤ c^k + tolerance
};

struct TensorAngleTable {
    double c = 0.0;
    std::vector<TensorAngleRow> rows;
    bool pass = true;
};

TensorAngleTable tensorAngleDecay(const std::vector<SubspaceComponent>& components, int kMax, double tolerance = 1e-9,
                                  double intersectionThreshold = 1e-8, int threads = 1);

struct DecompositionReport {
    int degree = 0;
    int k = 0;
    double c = 0.0;
    std::vector<Vector> parts;  // v_i ∈ V_i^n in H_n coordinates
    double sigmaMin = 0.0;      // of the concatenated component bases
    double residual = 0.0;      // ‖v − Σ v_i‖
    double normSquared = 0.0;   // ‖v‖²
    double partsSquared = 0.0;  // Σ ‖v_i‖²
    double lowerBound = 0.0;    // (1 − k cⁿ)‖v‖²
    double upperBound = 0.0;    // (1 + k cⁿ)‖v‖²
    bool applicable = false;    // 1 − k cⁿ > 0
    bool lowerHolds = false;
    bool upperHolds = false;
};

/// Splits v ∈ V^n along the component pieces. Throws NumericalFailure
/// ("decomposition not unique") when σ_min of the concatenated bases is at
/// or below `independenceThreshold`, and InvalidInput when v ∉ Σ V_i^n.
DecompositionReport componentDecomposition(const Vector& v, const std::vector<GradedSubspace>& pieces, double c,
                                           double independenceThreshold = 1e-8, double tolerance = 1e-9);

struct ClosednessRow {
    int degree = 0;
    double sigmaMin = 0.0;
    double boundSquared = 0.0;  // 1 − cⁿ(m − 1)
    double bound = 0.0;         // √max(0, boundSquared)
    bool boundActive = false;   // boundSquared > 0
    bool pass = true;
};

struct ClosednessReport {
    double c = 0.0;
    int components = 0;
    std::vector<ClosednessRow> rows;
    bool pass = true;
};

ClosednessReport closednessWitness(const std::vector<SubspaceComponent>& components, int nMax, double tolerance = 1e-9,
                                   double intersectionThreshold = 1e-8, int threads = 1);

struct SumCheckRow {
    int degree = 0;
    Eigen::Index rank = 0;
    double sigmaMin = 0.0;  // smallest nonzero singular value of the sum map
    double sigmaMax = 0.0;
    double ratio = 0.0;     // sigmaMin / sigmaMax
};

struct SumCheckReport {
    std::vector<SumCheckRow> rows;
    double floor = 0.0;       // min sigmaMin over degrees
    double ratioFloor = 0.0;  // min ratio over degrees
};

/// σ of ⊕ L_i^n → H_n restricted to the orthogonal complement of its kernel.
SumCheckReport subspaceSumCheck(const std::vector<SubspaceComponent>& components, int nMax,
                                double rankThreshold = 1e-10, int threads = 1);

}  // namespace dalab

#pragma once

// Compressed shifts T_i = P S_i|_F on F = ⊕ F_n, their commutators, and
// Schatten-class diagnostics.

#include "dalab/fock.hpp"
#include "dalab/subspace.hpp"
#include "dalab/variety.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dalab {

/// Graded pieces F_0, …, F_{N+1} of one quotient module. Blocks are
/// available for source degrees 0 … N.
class QuotientModel {
public:
    using PieceFn = std::function<GradedSubspace(int)>;

    QuotientModel(int d, int maxDegree, const PieceFn& piece, int threads = 1);
    static QuotientModel fromIdeal(const IdealSpec& ideal, int maxDegree, double rankThreshold = 1e-10, int threads = 1);
    static QuotientModel fromVariety(const VarietySpec& variety, int maxDegree, double rankThreshold = 1e-10,
                                     int threads = 1);
    /// I = 0: F_n = H_n.
    static QuotientModel fullSpace(int d, int maxDegree, int threads = 1);

    int variables() const { return d_; }
    int maxDegree() const { return maxDegree_; }
    bool isFullSpace() const { return fullSpace_; }
    /// F_n for 0 ≤ n ≤ N+1 (materialized on demand for the full space).
    GradedSubspace piece(int n) const;

    /// T_i^{(n)} : F_n → F_{n+1}, (basis F_{n+1})ᴴ S_i (basis F_n).
    OperatorBlock compressedShiftBlock(int i, int n) const;
    /// C_n = block of [T_i*, T_j] on F_n.
    OperatorBlock commutatorBlock(int i, int j, int n) const;
    /// [P, S_i] from H_n to H_{n+1}, in ε coordinates.
    OperatorBlock projectionCommutatorBlock(int i, int n) const;
    /// P[S_i*, S_j]P compressed to F_n.
    OperatorBlock principalTermBlock(int i, int j, int n) const;
    /// Frobenius norm of Q C_n Qᴴ − (P[S_i*,S_j]P − [P,S_i]*[P,S_j]) on H_n.
    double lemmaIdentityResidual(int i, int j, int n) const;

private:
    void requireBlockDegree(int n, const char* what) const;
    void requireVariable(int i, const char* what) const;

    int d_;
    int maxDegree_;
    bool fullSpace_ = false;
    std::vector<GradedSubspace> pieces_;
};

/// Block norms at or below this level are treated as numerically zero when
/// fitting decay rates.
inline constexpr double kNoiseFloor = 1e-13;

struct SeriesEntry {
    int degree = 0;
    double norm = 0.0;
    Eigen::Index rank = 0;
    RealVector singularValues;
    bool boundary = false;  // one of the last two computed degrees
};

struct CommutatorSeries {
    int i = 0;
    int j = 0;
    int variables = 1;
    bool fullSpace = false;
    std::vector<SeriesEntry> commutator;  // [T_i*, T_j] on F_n
    std::vector<SeriesEntry> principal;   // P[S_i*, S_j]P on F_n
};

CommutatorSeries commutatorSeries(const QuotientModel& model, int i, int j, double rankThreshold = 1e-10,
                                  int threads = 1);

enum class ConvergenceFlag { Converging, Diverging, Inconclusive };
std::string flagName(ConvergenceFlag flag);

struct SchattenReport {
    double p = 1.0;
    int truncation = 0;
    std::vector<double> contributions;  // Σ_k s_k(C_n)^p
    std::vector<double> partialSums;
    std::vector<double> majorantPartialSums;  // Σ 2^p dim H_n / (n+1)^p
    bool dominatedByMajorant = true;
    double contributionSlope = 0.0;  // log-log slope of contributions, top half, boundary excluded
    bool slopeDefined = false;
    double tailIncrement = 0.0;  // largest contribution over the last quarter of degrees
    ConvergenceFlag flag = ConvergenceFlag::Inconclusive;
};

/// Partial sums for degrees 0 … N of the commutator series.
SchattenReport schattenPartialSum(const CommutatorSeries& series, double p, int truncation);

struct PowerFit {
    double gamma = 0.0;  // ‖X_n‖ ~ n^{-gamma}
    double delta = 0.0;  // rank X_n ~ rho n^delta
    double rho = 0.0;
    int points = 0;
};

struct DecayFit {
    PowerFit commutator;
    PowerFit principal;
    /// (1 + delta)/gamma of the principal-term series. HEURISTIC.
    double pStar = 0.0;
    bool heuristic = true;
};

/// Log-log least squares over the top half of the non-boundary degrees.
/// Throws NumericalFailure ("undefined fit") when the commutator series has
/// fewer than 10 nonzero degrees.
DecayFit decayFit(const CommutatorSeries& series);

}  // namespace dalab

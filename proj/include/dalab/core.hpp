#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dalab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr const char* kVersion = "1.0.0";

// Input that violates a documented precondition (bad shapes, non-isometric
// bases, redundant components, schema violations).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested problem size exceeds the configured dim H_n cap.
class ScaleGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical precondition failed at run time (dependent components,
// singular blocks, undefined fits, image escaping its target piece).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    // Singular values below rankThreshold * sigma_max count as zero.
    double rankThreshold = 1e-10;
    // Principal cosines within this distance of 1 mark intersection directions.
    double intersectionThreshold = 1e-8;
    // Residual tolerance for identity checks.
    double residual = 1e-9;
};

}  // namespace dalab

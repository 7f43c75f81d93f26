#pragma once

#include <algorithm>
#include <cmath>

// Central numeric tolerances. Everything the solvers compare comes out of a
// linear solve, so comparisons go through the scaled helpers below instead of
// raw operator== or ad-hoc epsilons scattered around the code.

namespace pro::tol {

// Row sums of a transition matrix may deviate from 1 by at most this.
inline constexpr double kRowSum = 1e-12;

// Residual bound for hitting-time systems, ||(I - Q)phi - r||_inf.
inline constexpr double kHitResidual = 1e-9;

// Residual bound for stationary-distribution solves, ||pi Q - pi||_inf.
inline constexpr double kStationaryResidual = 1e-12;

// Bound for reconstructing a hitting time from its two-path decomposition.
inline constexpr double kDecomposition = 1e-8;

// Relative half-width of the tie band for comparing values and costs,
// scaled by (1 + magnitude).
inline constexpr double kValueCompare = 1e-9;

// Default sup-norm displacement at which value iteration stops.
inline constexpr double kViEpsilon = 1e-10;

// Every zapping jump costs one step regardless of where it lands.
inline constexpr double kZapStepCost = 1.0;

inline double band(double a, double b) {
  return kValueCompare * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

// a and b agree within the scaled tie band.
inline bool near(double a, double b) { return std::fabs(a - b) <= band(a, b); }

// a is below b by more than the tie band.
inline bool definitely_less(double a, double b) { return a < b - band(a, b); }

}  // namespace pro::tol

#pragma once

namespace mlab {

// Relative eigenvalue cutoff shared by spectral truncation and every pseudo-inverse.
inline constexpr double kRankTolerance = 1e-12;

// Negative eigenvalues / MMD^2 of at most this magnitude are treated as round-off.
inline constexpr double kNegativeClamp = 1e-10;

inline constexpr double kProbabilityTolerance = 1e-12;

}  // namespace mlab

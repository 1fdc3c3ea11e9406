#pragma once

// Data-parallel kernel-row evaluation. Every routine has a scalar reference
// implementation and, on x86_64, an AVX2+FMA variant selected at runtime.
// The two are equivalence-tested in tests/test_simd.cpp.

#include <cstddef>
#include <span>

#include "mlab/points.hpp"

namespace mlab::simd {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();

/// ISA used by default. Equals detected_isa() unless the environment variable
/// MLAB_ISA=scalar forces the reference path.
Isa active_isa();

/// Raw view of `count` points of a PointSet starting at `first`.
struct CoordView {
  const double* const* coords;  // dim pointers, each already offset by `first`
  std::size_t dim;
  std::size_t count;
};

/// out[j] = ||q - p_j||^2
void sq_distance_row(std::span<const double> query, const PointSet& points, std::size_t first,
                     std::span<double> out, Isa isa = active_isa());

/// out[j] = exp(-scale * ||q - p_j||^2)
void gaussian_row(std::span<const double> query, const PointSet& points, std::size_t first,
                  double scale, std::span<double> out, Isa isa = active_isa());

/// out[j] = exp(-scale * ||q - p_j||)
void laplacian_row(std::span<const double> query, const PointSet& points, std::size_t first,
                   double scale, std::span<double> out, Isa isa = active_isa());

/// x[j] <- exp(x[j]) for x[j] <= 0. Positive inputs are a precondition violation.
void exp_nonpositive(std::span<double> x, Isa isa = active_isa());

namespace detail {

// Per-ISA entry points. `out` has view.count entries.
namespace scalar {
void sq_distance_row(const double* q, CoordView view, double* out);
void gaussian_row(const double* q, CoordView view, double scale, double* out);
void laplacian_row(const double* q, CoordView view, double scale, double* out);
void exp_nonpositive(double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
void sq_distance_row(const double* q, CoordView view, double* out);
void gaussian_row(const double* q, CoordView view, double scale, double* out);
void laplacian_row(const double* q, CoordView view, double scale, double* out);
void exp_nonpositive(double* x, std::size_t n);
}  // namespace avx2

}  // namespace detail
}  // namespace mlab::simd

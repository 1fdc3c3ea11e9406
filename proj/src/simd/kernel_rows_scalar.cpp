#include <cmath>

#include "mlab/simd/kernel_rows.hpp"

namespace mlab::simd::detail::scalar {

void sq_distance_row(const double* q, CoordView view, double* out) {
  for (std::size_t j = 0; j < view.count; ++j) out[j] = 0.0;
  for (std::size_t d = 0; d < view.dim; ++d) {
    const double* c = view.coords[d];
    const double qd = q[d];
    for (std::size_t j = 0; j < view.count; ++j) {
      const double diff = c[j] - qd;
      out[j] += diff * diff;
    }
  }
}

void gaussian_row(const double* q, CoordView view, double scale, double* out) {
  sq_distance_row(q, view, out);
  for (std::size_t j = 0; j < view.count; ++j) out[j] = std::exp(-scale * out[j]);
}

void laplacian_row(const double* q, CoordView view, double scale, double* out) {
  sq_distance_row(q, view, out);
  for (std::size_t j = 0; j < view.count; ++j) out[j] = std::exp(-scale * std::sqrt(out[j]));
}

void exp_nonpositive(double* x, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) x[j] = std::exp(x[j]);
}

}  // namespace mlab::simd::detail::scalar

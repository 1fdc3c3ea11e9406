// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached after a runtime
// CPU check in dispatch.cpp.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mlab/simd/kernel_rows.hpp"

namespace mlab::simd::detail::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

// exp(x) for x <= 0. Range reduction x = n ln2 + r, |r| <= ln2/2, degree-13
// Taylor polynomial (truncation < 1e-17 relative), scaling by 2^n split in two
// factors so that results down to the subnormal range stay representable.
inline __m256d exp_nonpositive_pd(__m256d x) {
  const __m256d lo_clamp = _mm256_set1_pd(-746.0);
  x = _mm256_max_pd(x, lo_clamp);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(0.6931471805599453);
  const __m256d ln2_lo = _mm256_set1_pd(2.3190468138462996e-17);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr std::array<double, 14> kInvFactorial = {
      1.0,
      1.0,
      0.5,
      1.6666666666666666e-01,
      4.1666666666666664e-02,
      8.3333333333333332e-03,
      1.3888888888888889e-03,
      1.9841269841269841e-04,
      2.4801587301587302e-05,
      2.7557319223985893e-06,
      2.7557319223985888e-07,
      2.5052108385441720e-08,
      2.0876756987868100e-09,
      1.6059043836821613e-10,
  };
  __m256d p = _mm256_set1_pd(kInvFactorial[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFactorial[k]));

  // n is integral and in [-1077, 0]; split n = n1 + n2 with both halves >= -539.
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256i e1 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52);
  const __m256i e2 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52);
  p = _mm256_mul_pd(p, _mm256_castsi256_pd(e1));
  return _mm256_mul_pd(p, _mm256_castsi256_pd(e2));
}

inline __m256d sq_distance_block(const double* q, const double* const* coords, std::size_t dim,
                                 std::size_t j) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t d = 0; d < dim; ++d) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(coords[d] + j), _mm256_set1_pd(q[d]));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
  }
  return acc;
}

enum class Op { sq_distance, gaussian, laplacian };

template <Op op>
inline __m256d finish(__m256d d2, __m256d neg_scale) {
  if constexpr (op == Op::sq_distance) {
    return d2;
  } else if constexpr (op == Op::gaussian) {
    return exp_nonpositive_pd(_mm256_mul_pd(neg_scale, d2));
  } else {
    return exp_nonpositive_pd(_mm256_mul_pd(neg_scale, _mm256_sqrt_pd(d2)));
  }
}

template <Op op>
void row(const double* q, CoordView view, double scale, double* out) {
  const __m256d neg_scale = _mm256_set1_pd(-scale);
  std::size_t j = 0;
  for (; j + kLanes <= view.count; j += kLanes) {
    _mm256_storeu_pd(out + j, finish<op>(sq_distance_block(q, view.coords, view.dim, j), neg_scale));
  }
  if (j == view.count) return;

  // Tail: pad with the query point so every lane goes through the same arithmetic.
  const std::size_t rest = view.count - j;
  std::array<std::array<double, kLanes>, 16> small{};
  std::vector<std::array<double, kLanes>> large;
  std::array<double, kLanes>* pad = small.data();
  if (view.dim > small.size()) {
    large.resize(view.dim);
    pad = large.data();
  }
  std::array<const double*, 16> small_ptrs{};
  std::vector<const double*> large_ptrs;
  const double** ptrs = small_ptrs.data();
  if (view.dim > small_ptrs.size()) {
    large_ptrs.resize(view.dim);
    ptrs = large_ptrs.data();
  }
  for (std::size_t d = 0; d < view.dim; ++d) {
    pad[d].fill(q[d]);
    std::copy_n(view.coords[d] + j, rest, pad[d].begin());
    ptrs[d] = pad[d].data();
  }
  alignas(32) std::array<double, kLanes> tmp{};
  _mm256_storeu_pd(tmp.data(), finish<op>(sq_distance_block(q, ptrs, view.dim, 0), neg_scale));
  std::copy_n(tmp.begin(), rest, out + j);
}

}  // namespace

void sq_distance_row(const double* q, CoordView view, double* out) {
  row<Op::sq_distance>(q, view, 0.0, out);
}

void gaussian_row(const double* q, CoordView view, double scale, double* out) {
  row<Op::gaussian>(q, view, scale, out);
}

void laplacian_row(const double* q, CoordView view, double scale, double* out) {
  row<Op::laplacian>(q, view, scale, out);
}

void exp_nonpositive(double* x, std::size_t n) {
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    _mm256_storeu_pd(x + j, exp_nonpositive_pd(_mm256_loadu_pd(x + j)));
  }
  if (j < n) {
    alignas(32) std::array<double, kLanes> tmp{};
    std::copy(x + j, x + n, tmp.begin());
    _mm256_storeu_pd(tmp.data(), exp_nonpositive_pd(_mm256_loadu_pd(tmp.data())));
    std::copy_n(tmp.begin(), n - j, x + j);
  }
}

}  // namespace mlab::simd::detail::avx2

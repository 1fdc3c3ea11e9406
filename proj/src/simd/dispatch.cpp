#include <cstdlib>
#include <cstring>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/simd/kernel_rows.hpp"

namespace mlab::simd {
namespace {

struct ViewStorage {
  std::vector<const double*> ptrs;
  CoordView view;
};

ViewStorage make_view(std::span<const double> query, const PointSet& points, std::size_t first,
                      std::span<double> out) {
  if (query.size() != points.dim()) throw DomainError("query dimension does not match point set");
  if (first > points.size() || out.size() > points.size() - first) {
    throw DomainError("kernel row range exceeds point set");
  }
  ViewStorage s;
  s.ptrs.resize(points.dim());
  for (std::size_t d = 0; d < points.dim(); ++d) s.ptrs[d] = points.coordinate(d).data() + first;
  s.view = CoordView{s.ptrs.data(), points.dim(), out.size()};
  return s;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
#if defined(MLAB_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (ok) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("MLAB_ISA");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return detected_isa();
  }();
  return isa;
}

void sq_distance_row(std::span<const double> query, const PointSet& points, std::size_t first,
                     std::span<double> out, Isa isa) {
  auto s = make_view(query, points, first, out);
#if defined(MLAB_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2::sq_distance_row(query.data(), s.view, out.data());
#endif
  detail::scalar::sq_distance_row(query.data(), s.view, out.data());
}

void gaussian_row(std::span<const double> query, const PointSet& points, std::size_t first,
                  double scale, std::span<double> out, Isa isa) {
  auto s = make_view(query, points, first, out);
#if defined(MLAB_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2::gaussian_row(query.data(), s.view, scale, out.data());
#endif
  detail::scalar::gaussian_row(query.data(), s.view, scale, out.data());
}

void laplacian_row(std::span<const double> query, const PointSet& points, std::size_t first,
                   double scale, std::span<double> out, Isa isa) {
  auto s = make_view(query, points, first, out);
#if defined(MLAB_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2::laplacian_row(query.data(), s.view, scale, out.data());
#endif
  detail::scalar::laplacian_row(query.data(), s.view, scale, out.data());
}

void exp_nonpositive(std::span<double> x, Isa isa) {
#if defined(MLAB_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2::exp_nonpositive(x.data(), x.size());
#endif
  detail::scalar::exp_nonpositive(x.data(), x.size());
}

}  // namespace mlab::simd

#include "mlab/points.hpp"

#include <string>

#include "mlab/errors.hpp"

namespace mlab {

PointSet::PointSet(std::size_t dim, std::initializer_list<Point> points) : PointSet(dim) {
  reserve(points.size());
  for (const auto& p : points) push_back(p);
}

PointSet PointSet::from_points(std::size_t dim, std::span<const Point> points) {
  PointSet out(dim);
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p);
  return out;
}

void PointSet::push_back(std::span<const double> p) {
  if (p.size() != dim_) {
    throw DomainError("point has dimension " + std::to_string(p.size()) + ", expected " +
                      std::to_string(dim_));
  }
  for (std::size_t d = 0; d < dim_; ++d) coords_[d].push_back(p[d]);
  ++size_;
}

void PointSet::append(const PointSet& other) {
  if (other.dim_ != dim_) throw DomainError("cannot append point sets of different dimension");
  for (std::size_t d = 0; d < dim_; ++d) {
    coords_[d].insert(coords_[d].end(), other.coords_[d].begin(), other.coords_[d].end());
  }
  size_ += other.size_;
}

void PointSet::reserve(std::size_t n) {
  for (auto& c : coords_) c.reserve(n);
}

Point PointSet::point(std::size_t j) const {
  Point p(dim_);
  copy_point(j, p);
  return p;
}

void PointSet::copy_point(std::size_t j, std::span<double> out) const {
  for (std::size_t d = 0; d < dim_; ++d) out[d] = coords_[d][j];
}

}  // namespace mlab

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mlab {

using Point = std::vector<double>;

/// Fixed-dimension point cloud stored coordinate-major: all first coordinates,
/// then all second coordinates, and so on. This is the layout the kernel-row
/// kernels stream over.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::initializer_list<Point> points);

  static PointSet from_points(std::size_t dim, std::span<const Point> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void push_back(std::span<const double> p);
  void append(const PointSet& other);
  void reserve(std::size_t n);

  double coord(std::size_t j, std::size_t d) const { return coords_[d][j]; }
  std::span<const double> coordinate(std::size_t d) const { return coords_[d]; }
  Point point(std::size_t j) const;
  void copy_point(std::size_t j, std::span<double> out) const;

  bool operator==(const PointSet& other) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::vector<std::vector<double>> coords_ = std::vector<std::vector<double>>(dim_);
};

}  // namespace mlab

#pragma once

// Domain types shared by every solver: uniform grids, scalar and vector
// fields on them, regularization parameters and point measures.

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace krtv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Uniform 1D or 2D grid. A 1D grid of n nodes is stored as height 1,
/// width n. Node (row, col) sits at physical position (col*h, row*h).
class Shape {
 public:
  Shape() = default;

  static Shape line(std::size_t n, double h = 1.0);
  static Shape plane(std::size_t height, std::size_t width, double h = 1.0);

  int dim() const { return dim_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return height_ * width_; }
  double spacing() const { return h_; }

  /// h^d, the quadrature weight of one node.
  double cell_volume() const;

  /// Euclidean diagonal of the bounding box, h * sqrt(sum (dim_i - 1)^2).
  double diameter() const;

  bool operator==(const Shape& other) const = default;

  std::string describe() const;

 private:
  Shape(int dim, std::size_t height, std::size_t width, double h)
      : dim_(dim), height_(height), width_(width), h_(h) {}

  int dim_ = 1;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  double h_ = 1.0;
};

void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Scalar field on a grid, row-major.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Shape shape, double fill = 0.0);
  /// Throws if the value count does not match the shape or a value is not finite.
  GridFunction(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * shape_.width() + col]; }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * shape_.width() + col];
  }

  double sum() const;
  double mean() const;
  double min() const;
  double max() const;
  /// max |value|
  double max_abs() const;
  /// sum |value| * h^d
  double l1_norm() const;
  /// sum value * h^d
  double integral() const;
  /// Population standard deviation of the values.
  double stddev() const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

/// Vector field with one component per spatial axis, stored component-major:
/// component c occupies [c*N, (c+1)*N). Component 0 is the x (column)
/// direction, component 1 the y (row) direction.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Shape shape);
  VectorField(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  int components() const { return shape_.dim(); }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Euclidean magnitude of the vector at node k.
  double magnitude(std::size_t k) const;
  /// sum_k |v(k)| * h^d
  double l1_norm() const;
  /// max_k |v(k)|
  double max_magnitude() const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// The pair (lambda1, lambda2). Either entry may be kInfinity.
struct RegParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  /// Both entries must be > 0 (infinity allowed, NaN rejected).
  void validate() const;
  bool lambda1_finite() const { return lambda1 < kInfinity; }
  bool lambda2_finite() const { return lambda2 < kInfinity; }
};

/// Finite signed sum of point masses, sum_i w_i delta_{x_i}.
struct DiscreteMeasure {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  double total_mass() const;
  double total_variation() const;
  /// Throws unless points are pairwise distinct, equal-dimensional and finite,
  /// and every weight is finite and nonzero.
  void validate() const;
};

}  // namespace krtv

#include "krtv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace krtv {

Shape Shape::line(std::size_t n, double h) {
  if (n == 0) throw InvalidArgument("grid must have at least one node");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
  return Shape(1, 1, n, h);
}

Shape Shape::plane(std::size_t height, std::size_t width, double h) {
  if (height == 0 || width == 0) throw InvalidArgument("grid must have at least one node");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
  return Shape(2, height, width, h);
}

double Shape::cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

double Shape::diameter() const {
  const double dx = static_cast<double>(width_ - 1);
  if (dim_ == 1) return h_ * dx;
  const double dy = static_cast<double>(height_ - 1);
  return h_ * std::sqrt(dx * dx + dy * dy);
}

std::string Shape::describe() const {
  std::ostringstream os;
  if (dim_ == 1) {
    os << width_;
  } else {
    os << height_ << "x" << width_;
  }
  os << " (h=" << h_ << ")";
  return os.str();
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw ShapeMismatch(std::string(what) + ": shape " + a.describe() + " does not match " +
                        b.describe());
  }
}

GridFunction::GridFunction(Shape shape, double fill)
    : shape_(shape), values_(shape.size(), fill) {
  if (!std::isfinite(fill)) throw InvalidArgument("grid function values must be finite");
}

GridFunction::GridFunction(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeMismatch("grid function has " + std::to_string(values_.size()) +
                        " values, shape " + shape_.describe() + " needs " +
                        std::to_string(shape_.size()));
  }
  if (!all_finite()) throw InvalidArgument("grid function values must be finite");
}

double GridFunction::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double GridFunction::mean() const { return sum() / static_cast<double>(values_.size()); }

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s * shape_.cell_volume();
}

double GridFunction::integral() const { return sum() * shape_.cell_volume(); }

double GridFunction::stddev() const {
  const double m = mean();
  double s = 0.0;
  for (double v : values_) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values_.size()));
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(Shape shape)
    : shape_(shape), data_(shape.size() * static_cast<std::size_t>(shape.dim()), 0.0) {}

VectorField::VectorField(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size() * static_cast<std::size_t>(shape_.dim())) {
    throw ShapeMismatch("vector field data size does not match shape " + shape_.describe());
  }
  if (!all_finite()) throw InvalidArgument("vector field values must be finite");
}

std::span<double> VectorField::component(int c) {
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * shape_.size(),
                                          shape_.size());
}

std::span<const double> VectorField::component(int c) const {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * shape_.size(),
                                                shape_.size());
}

double VectorField::magnitude(std::size_t k) const {
  const std::size_t n = shape_.size();
  double s = 0.0;
  for (int c = 0; c < shape_.dim(); ++c) {
    const double v = data_[static_cast<std::size_t>(c) * n + k];
    s += v * v;
  }
  return std::sqrt(s);
}

double VectorField::l1_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < shape_.size(); ++k) s += magnitude(k);
  return s * shape_.cell_volume();
}

double VectorField::max_magnitude() const {
  double m = 0.0;
  for (std::size_t k = 0; k < shape_.size(); ++k) m = std::max(m, magnitude(k));
  return m;
}

bool VectorField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void RegParams::validate() const {
  if (!(lambda1 > 0.0)) throw InvalidArgument("lambda1 must be positive");
  if (!(lambda2 > 0.0)) throw InvalidArgument("lambda2 must be positive");
}

double DiscreteMeasure::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double DiscreteMeasure::total_variation() const {
  double s = 0.0;
  for (double w : weights) s += std::abs(w);
  return s;
}

void DiscreteMeasure::validate() const {
  if (points.size() != weights.size()) {
    throw InvalidArgument("measure has " + std::to_string(points.size()) + " points but " +
                          std::to_string(weights.size()) + " weights");
  }
  const int d = dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(points[i].size()) != d || d == 0) {
      throw InvalidArgument("measure points must share a nonzero dimension");
    }
    for (double c : points[i]) {
      if (!std::isfinite(c)) throw InvalidArgument("measure point coordinates must be finite");
    }
    if (!std::isfinite(weights[i]) || weights[i] == 0.0) {
      throw InvalidArgument("measure weights must be finite and nonzero");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        throw InvalidArgument("measure points " + std::to_string(j) + " and " +
                              std::to_string(i) + " coincide");
      }
    }
  }
}

}  // namespace krtv

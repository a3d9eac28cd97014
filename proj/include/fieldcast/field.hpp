#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fieldcast {

// Dense multi-channel 2-D grid snapshot. Values are row-major per channel;
// the x coordinate runs along a row (fastest index), y down the rows.
// Shape is fixed at construction; all arithmetic is value-semantic.
class Field {
 public:
  Field() = default;
  Field(int channels, int height, int width, double fill = 0.0);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double& at(int c, int i, int j) {
    return data_[(static_cast<std::size_t>(c) * height_ + i) * width_ + j];
  }
  double at(int c, int i, int j) const {
    return data_[(static_cast<std::size_t>(c) * height_ + i) * width_ + j];
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Field& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  std::string shape_str() const;

  bool all_finite() const;

  // In-place arithmetic; shapes must match.
  Field& operator+=(const Field& rhs);
  Field& operator-=(const Field& rhs);
  Field& operator*=(double s);
  // this += s * rhs
  void axpy(double s, const Field& rhs);
  void fill(double v);

  double max_abs() const;
  double sum() const;
  double sum_abs() const;       // L1
  double sum_squares() const;   // squared L2
  double dot(const Field& rhs) const;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(Field lhs, double s);

// Require matching shapes, else throw shape_error naming both shapes.
void check_same_shape(const Field& a, const Field& b, const char* where);

// Fixed-depth stack of equally shaped fields, newest first. Pushing shifts
// everything down one slot and drops the oldest entry.
class FieldStack {
 public:
  FieldStack() = default;
  FieldStack(int depth, const Field& prototype);

  int depth() const { return static_cast<int>(entries_.size()); }
  const Field& entry(int p) const { return entries_[p]; }
  Field& entry(int p) { return entries_[p]; }
  const std::vector<Field>& entries() const { return entries_; }

  void shift_insert(const Field& newest);

 private:
  std::vector<Field> entries_;
};

// Halo handling outside the grid. dirichlet_zero pads with zeros,
// neumann_replicate pads with the nearest edge value.
enum class BoundaryRule { dirichlet_zero, neumann_replicate };

const char* to_string(BoundaryRule b);

// Finite-difference tap matrix approximating d^(jx+jy) / dx^jx dy^jy.
// Taps are row-major, odd dimensions, centered on the middle element.
struct StencilKernel {
  int rows = 0;
  int cols = 0;
  int order_x = 0;
  int order_y = 0;
  std::vector<double> taps;

  double tap(int p, int q) const { return taps[p * cols + q]; }
};

// Paper-standard second-derivative kernels and the central first
// differences used by the advective system.
StencilKernel make_d20();
StencilKernel make_d02();
StencilKernel make_d10();
StencilKernel make_d01();

// Correlation (no kernel flip) of taps with the halo-padded field,
// single channel at a time; output shape equals input shape.
Field stencil_apply(const Field& f, const StencilKernel& k, BoundaryRule b);

// Exact adjoint of stencil_apply under the same boundary rule: scatters
// upstream through the same padded index map.
Field stencil_apply_adjoint(const Field& upstream, const StencilKernel& k,
                            BoundaryRule b);

// Returns a stack equal to s with `newest` inserted in front and the
// oldest entry dropped.
FieldStack stack_shift_insert(const FieldStack& s, const Field& newest);

// Pointwise sum_p w[p] * entries[p].
Field weighted_collapse(const FieldStack& s, const std::vector<double>& w);

}  // namespace fieldcast

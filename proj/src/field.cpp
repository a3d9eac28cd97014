#include "fieldcast/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fieldcast/errors.hpp"

namespace fieldcast {

Field::Field(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw shape_error("Field: non-positive dimensions " +
                      std::to_string(channels) + "x" + std::to_string(height) +
                      "x" + std::to_string(width));
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

std::string Field::shape_str() const {
  std::ostringstream os;
  os << channels_ << "x" << height_ << "x" << width_;
  return os.str();
}

bool Field::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void check_same_shape(const Field& a, const Field& b, const char* where) {
  if (!a.same_shape(b)) {
    throw shape_error(std::string(where) + ": shape mismatch " +
                      a.shape_str() + " vs " + b.shape_str());
  }
}

Field& Field::operator+=(const Field& rhs) {
  check_same_shape(*this, rhs, "Field::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Field& Field::operator-=(const Field& rhs) {
  check_same_shape(*this, rhs, "Field::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

void Field::axpy(double s, const Field& rhs) {
  check_same_shape(*this, rhs, "Field::axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * rhs.data_[i];
}

void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double Field::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Field::sum_abs() const {
  double s = 0.0;
  for (double v : data_) s += std::fabs(v);
  return s;
}

double Field::sum_squares() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

double Field::dot(const Field& rhs) const {
  check_same_shape(*this, rhs, "Field::dot");
  double s = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) s += data_[i] * rhs.data_[i];
  return s;
}

Field operator+(Field lhs, const Field& rhs) {
  lhs += rhs;
  return lhs;
}

Field operator-(Field lhs, const Field& rhs) {
  lhs -= rhs;
  return lhs;
}

Field operator*(Field lhs, double s) {
  lhs *= s;
  return lhs;
}

FieldStack::FieldStack(int depth, const Field& prototype) {
  if (depth <= 0) throw shape_error("FieldStack: depth must be positive");
  Field zero(prototype.channels(), prototype.height(), prototype.width());
  entries_.assign(depth, zero);
}

void FieldStack::shift_insert(const Field& newest) {
  if (entries_.empty()) throw shape_error("FieldStack: empty stack");
  check_same_shape(newest, entries_.front(), "FieldStack::shift_insert");
  for (int p = depth() - 1; p > 0; --p) entries_[p] = entries_[p - 1];
  entries_[0] = newest;
}

const char* to_string(BoundaryRule b) {
  switch (b) {
    case BoundaryRule::dirichlet_zero:
      return "dirichlet_zero";
    case BoundaryRule::neumann_replicate:
      return "neumann_replicate";
  }
  return "?";
}

StencilKernel make_d20() {
  return StencilKernel{3, 3, 2, 0, {0, 0, 0, 1, -2, 1, 0, 0, 0}};
}

StencilKernel make_d02() {
  return StencilKernel{3, 3, 0, 2, {0, 1, 0, 0, -2, 0, 0, 1, 0}};
}

StencilKernel make_d10() {
  return StencilKernel{3, 3, 1, 0, {0, 0, 0, -0.5, 0, 0.5, 0, 0, 0}};
}

StencilKernel make_d01() {
  return StencilKernel{3, 3, 0, 1, {0, -0.5, 0, 0, 0, 0, 0, 0.5, 0}};
}

namespace {

inline int clampi(int v, int lo, int hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

void check_kernel_fits(const Field& f, const StencilKernel& k) {
  if (k.rows % 2 == 0 || k.cols % 2 == 0 || k.rows <= 0 || k.cols <= 0) {
    throw shape_error("stencil_apply: kernel dims must be odd positive, got " +
                      std::to_string(k.rows) + "x" + std::to_string(k.cols));
  }
  if (k.rows > f.height() || k.cols > f.width()) {
    throw shape_error("stencil_apply: kernel " + std::to_string(k.rows) + "x" +
                      std::to_string(k.cols) + " does not fit field " +
                      f.shape_str());
  }
}

}  // namespace

Field stencil_apply(const Field& f, const StencilKernel& k, BoundaryRule b) {
  check_kernel_fits(f, k);
  const int hr = k.rows / 2, hc = k.cols / 2;
  const int H = f.height(), W = f.width();
  Field out(f.channels(), H, W);
  for (int c = 0; c < f.channels(); ++c) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        double acc = 0.0;
        for (int p = 0; p < k.rows; ++p) {
          const int ii = i + p - hr;
          for (int q = 0; q < k.cols; ++q) {
            const int jj = j + q - hc;
            const double t = k.tap(p, q);
            if (t == 0.0) continue;
            if (b == BoundaryRule::dirichlet_zero) {
              if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
              acc += t * f.at(c, ii, jj);
            } else {
              acc += t * f.at(c, clampi(ii, 0, H - 1), clampi(jj, 0, W - 1));
            }
          }
        }
        out.at(c, i, j) = acc;
      }
    }
  }
  return out;
}

Field stencil_apply_adjoint(const Field& upstream, const StencilKernel& k,
                            BoundaryRule b) {
  check_kernel_fits(upstream, k);
  const int hr = k.rows / 2, hc = k.cols / 2;
  const int H = upstream.height(), W = upstream.width();
  Field out(upstream.channels(), H, W);
  for (int c = 0; c < upstream.channels(); ++c) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        const double g = upstream.at(c, i, j);
        if (g == 0.0) continue;
        for (int p = 0; p < k.rows; ++p) {
          const int ii = i + p - hr;
          for (int q = 0; q < k.cols; ++q) {
            const int jj = j + q - hc;
            const double t = k.tap(p, q);
            if (t == 0.0) continue;
            if (b == BoundaryRule::dirichlet_zero) {
              if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
              out.at(c, ii, jj) += t * g;
            } else {
              out.at(c, clampi(ii, 0, H - 1), clampi(jj, 0, W - 1)) += t * g;
            }
          }
        }
      }
    }
  }
  return out;
}

FieldStack stack_shift_insert(const FieldStack& s, const Field& newest) {
  FieldStack out = s;
  out.shift_insert(newest);
  return out;
}

Field weighted_collapse(const FieldStack& s, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != s.depth()) {
    throw shape_error("weighted_collapse: coefficient length " +
                      std::to_string(w.size()) + " vs stack depth " +
                      std::to_string(s.depth()));
  }
  Field out(s.entry(0).channels(), s.entry(0).height(), s.entry(0).width());
  for (int p = 0; p < s.depth(); ++p) out.axpy(w[p], s.entry(p));
  return out;
}

}  // namespace fieldcast

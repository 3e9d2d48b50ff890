// SPDX-License-Identifier: Apache-2.0
#include "rsad/mat.hpp"

#include <algorithm>
#include <cmath>

#include "rsad/error.hpp"

namespace rsad {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Mat: " + std::to_string(data_.size()) + " values for shape " +
                     shape_str());
  }
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Mat: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::col(std::size_t c) const {
  Mat out(rows_, 1);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Mat::set_col(std::size_t c, const Mat& v) {
  if (v.size() != rows_ || c >= cols_) {
    throw ShapeError("set_col: column " + v.shape_str() + " into " + shape_str());
  }
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Mat Mat::row_block(std::size_t begin, std::size_t end) const {
  Mat out(end - begin, cols_);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>(end * cols_), out.data_.begin());
  return out;
}

Mat Mat::col_block(std::size_t begin, std::size_t end) const {
  Mat out(rows_, end - begin);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = (*this)(r, c);
  }
  return out;
}

Mat Mat::transposed() const {
  Mat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  }
  return out;
}

void Mat::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Mat::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Mat& Mat::operator+=(const Mat& o) {
  if (!same_shape(o)) throw ShapeError("+=: " + shape_str() + " vs " + o.shape_str());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  if (!same_shape(o)) throw ShapeError("-=: " + shape_str() + " vs " + o.shape_str());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Mat& Mat::operator*=(double c) {
  for (auto& v : data_) v *= c;
  return *this;
}

Mat vstack(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("vstack: " + a.shape_str() + " over " + b.shape_str());
  }
  Mat out(a.rows() + b.rows(), a.cols());
  auto dst = out.values();
  std::copy(a.values().begin(), a.values().end(), dst.begin());
  std::copy(b.values().begin(), b.values().end(),
            dst.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

}  // namespace rsad

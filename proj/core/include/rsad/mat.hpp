// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rsad {

/// Dense row-major matrix of doubles. Column vectors are n x 1 matrices.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
  static Mat ones(std::size_t rows, std::size_t cols) { return Mat(rows, cols, 1.0); }
  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Column c as a rows x 1 matrix.
  Mat col(std::size_t c) const;
  void set_col(std::size_t c, const Mat& v);

  /// Rows [begin, end) as a new matrix.
  Mat row_block(std::size_t begin, std::size_t end) const;
  /// Columns [begin, end) as a new matrix.
  Mat col_block(std::size_t begin, std::size_t end) const;

  Mat transposed() const;
  void fill(double v);
  bool all_finite() const;

  /// "rows x cols", used in error messages.
  std::string shape_str() const;
  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double c);

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Vertical concatenation [a; b]. Column counts must agree.
Mat vstack(const Mat& a, const Mat& b);

}  // namespace rsad

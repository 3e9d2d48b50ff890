// SPDX-License-Identifier: Apache-2.0
#include "rsad/numerics.hpp"

#include <Eigen/Core>
#include <cmath>

#include "rsad/error.hpp"

namespace rsad {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

ConstView view(const Mat& m) {
  return ConstView(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                   static_cast<Eigen::Index>(m.cols()));
}

View view(Mat& m) {
  return View(m.values().data(), static_cast<Eigen::Index>(m.rows()),
              static_cast<Eigen::Index>(m.cols()));
}

void require_same(const char* op, const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

template <typename F>
Mat zip(const Mat& a, const Mat& b, F f) {
  Mat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

template <typename F>
Mat map(const Mat& a, F f) {
  Mat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

Mat mat_mul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("mat_mul: " + a.shape_str() + " times " + b.shape_str());
  }
  Mat out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  return out;
}

Mat mat_mul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("mat_mul_tn: transpose of " + a.shape_str() + " times " + b.shape_str());
  }
  Mat out(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Mat mat_mul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("mat_mul_nt: " + a.shape_str() + " times transpose of " + b.shape_str());
  }
  Mat out(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

void mat_mul_nt_add(Mat& acc, const Mat& a, const Mat& b) {
  if (a.cols() != b.cols() || acc.rows() != a.rows() || acc.cols() != b.rows()) {
    throw ShapeError("mat_mul_nt_add: " + acc.shape_str() + " += " + a.shape_str() +
                     " times transpose of " + b.shape_str());
  }
  view(acc).noalias() += view(a) * view(b).transpose();
}

Mat add(const Mat& a, const Mat& b) {
  require_same("add", a, b);
  return zip(a, b, [](double x, double y) { return x + y; });
}

Mat add(const Mat& a, double c) {
  return map(a, [c](double x) { return x + c; });
}

Mat sub(const Mat& a, const Mat& b) {
  require_same("sub", a, b);
  return zip(a, b, [](double x, double y) { return x - y; });
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same("hadamard", a, b);
  return zip(a, b, [](double x, double y) { return x * y; });
}

Mat scale(double c, const Mat& a) {
  return map(a, [c](double x) { return c * x; });
}

double sigmoid(double x) {
  // Split on sign so exp() never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mat activation(Activation kind, const Mat& x) {
  switch (kind) {
    case Activation::kSigmoid:
      return map(x, [](double v) { return sigmoid(v); });
    case Activation::kTanh:
      return map(x, [](double v) { return std::tanh(v); });
  }
  return x;
}

Mat activation_deriv(Activation kind, const Mat& y) {
  switch (kind) {
    case Activation::kSigmoid:
      return map(y, [](double v) { return v * (1.0 - v); });
    case Activation::kTanh:
      return map(y, [](double v) { return 1.0 - v * v; });
  }
  return y;
}

double squared_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return s;
}

double residual_norm(const Mat& a, const Mat& b) {
  require_same("residual_norm", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Mat residual_norm_grad(const Mat& a, const Mat& b) {
  const double n = residual_norm(a, b);
  if (n == 0.0) return Mat(a.rows(), a.cols());
  return scale(1.0 / n, sub(a, b));
}

Mat finite_diff_grad(const ScalarFn& f, const Mat& x, double h) {
  if (!(h > 0.0)) throw NumericError("finite_diff_grad: step must be positive");
  Mat probe = x;
  Mat grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite evaluation at entry " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace rsad

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "rsad/mat.hpp"

namespace rsad {

Mat mat_mul(const Mat& a, const Mat& b);
/// aᵀ · b without materializing the transpose.
Mat mat_mul_tn(const Mat& a, const Mat& b);
/// a · bᵀ without materializing the transpose.
Mat mat_mul_nt(const Mat& a, const Mat& b);
/// acc += a · bᵀ, the outer-product accumulation used by backprop.
void mat_mul_nt_add(Mat& acc, const Mat& a, const Mat& b);

Mat add(const Mat& a, const Mat& b);
Mat add(const Mat& a, double c);
Mat sub(const Mat& a, const Mat& b);
Mat hadamard(const Mat& a, const Mat& b);
Mat scale(double c, const Mat& a);

enum class Activation { kSigmoid, kTanh };

double sigmoid(double x);
Mat activation(Activation kind, const Mat& x);
/// Derivative expressed through the activation output y.
Mat activation_deriv(Activation kind, const Mat& y);

/// Frobenius norm of a - b.
double residual_norm(const Mat& a, const Mat& b);
/// d/da ‖a - b‖_F. Zero matrix where the residual is exactly zero.
Mat residual_norm_grad(const Mat& a, const Mat& b);

/// Sum of squares of every entry.
double squared_norm(const Mat& a);

using ScalarFn = std::function<double(const Mat&)>;

/// Central-difference gradient of f at x. Throws NumericError if f is non-finite.
Mat finite_diff_grad(const ScalarFn& f, const Mat& x, double h = 1e-5);

}  // namespace rsad

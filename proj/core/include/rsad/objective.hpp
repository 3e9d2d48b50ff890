// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rsad/mat.hpp"

namespace rsad {

/// Relative weights of the reconstruction and the two prediction residuals.
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  /// Throws ConfigError if any weight is negative/non-finite or all are zero.
  void validate() const;
};

/// The three residual norms of one window and their weighted total.
struct LossBreakdown {
  double rec = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown& operator*=(double c);
};

/// rec = ‖x - x_r‖, p1 = ‖x_f - x̂_f1‖, p2 = ‖x_f - x̂_f2‖, total = α·rec + β·p1 + γ·p2.
LossBreakdown loss(const Mat& x, const Mat& x_r, const Mat& x_f, const Mat& x_f_hat1,
                   const Mat& x_f_hat2, const LossWeights& weights);

double weighted_total(double rec, double p1, double p2, const LossWeights& weights);

}  // namespace rsad

// SPDX-License-Identifier: Apache-2.0
#include "rsad/objective.hpp"

#include <cmath>

#include "rsad/error.hpp"
#include "rsad/numerics.hpp"

namespace rsad {

void LossWeights::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("loss weights must be finite and >= 0");
  }
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
    throw ConfigError("loss weights alpha, beta, gamma are all zero");
  }
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  rec += o.rec;
  p1 += o.p1;
  p2 += o.p2;
  total += o.total;
  return *this;
}

LossBreakdown& LossBreakdown::operator*=(double c) {
  rec *= c;
  p1 *= c;
  p2 *= c;
  total *= c;
  return *this;
}

double weighted_total(double rec, double p1, double p2, const LossWeights& w) {
  return w.alpha * rec + w.beta * p1 + w.gamma * p2;
}

LossBreakdown loss(const Mat& x, const Mat& x_r, const Mat& x_f, const Mat& x_f_hat1,
                   const Mat& x_f_hat2, const LossWeights& weights) {
  LossBreakdown b;
  b.rec = residual_norm(x, x_r);
  b.p1 = residual_norm(x_f, x_f_hat1);
  b.p2 = residual_norm(x_f, x_f_hat2);
  b.total = weighted_total(b.rec, b.p1, b.p2, weights);
  return b;
}

}  // namespace rsad

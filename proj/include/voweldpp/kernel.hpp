// Copyright 2026  The voweldpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

#include "voweldpp/types.hpp"

namespace voweldpp {

/// Shared spherical variance and inverse temperature of the phone kernel.
struct KernelParams {
  double sigma2 = 1.0;
  double rho = 1.0;
  static constexpr int kDim = 2;
};

/// Small MLP scoring how focal a phone mean is:
/// F(mu) = exp(U2 . tanh(U1 mu + b1) + b2).
struct FocalizationNet {
  Eigen::MatrixX2d U1;   // H x 2
  Eigen::VectorXd b1;    // H
  Eigen::VectorXd U2;    // H (the single output row)
  double b2 = 0.0;

  /// All-zero net of the given hidden width; scores every mean as 1.
  static FocalizationNet zeros(int hidden = 16);
  /// U1 ~ N(0, scale^2), other weights zero.
  static FocalizationNet random_init(int hidden, double scale, Rng& rng);

  int hidden() const { return static_cast<int>(b1.size()); }
};

inline constexpr double kKernelFloor = 1e-300;

/// Closed-form probability-product kernel between N(mu, s2 I) and
/// N(mu', s2 I) in two dimensions:
///   (2 rho)^{-d/2} (2 pi s2)^{(1-2rho)d/2} exp(-rho |mu-mu'|^2 / (4 s2)).
double prob_product_kernel(const Vec2& mu, const Vec2& mu_prime, const KernelParams& p);

/// log of the distance-independent prefactor of prob_product_kernel.
double kernel_log_prefactor(const KernelParams& p);

double focalization_score(const Vec2& mu, const FocalizationNet& net);

/// Builds L with L_ij = K(i,j) off the diagonal and K(i,i) + F(mu_i) on it.
/// With diagonal_only set the off-diagonal kernel is never evaluated and
/// those entries are zero (Bernoulli point process baseline).
/// Throws NumericalError if the result fails a Cholesky factorization.
Eigen::MatrixXd build_L(std::span<const Vec2> means, const KernelParams& p,
                        const FocalizationNet& net, bool diagonal_only = false);

}  // namespace voweldpp

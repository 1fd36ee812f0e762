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

#include "voweldpp/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace voweldpp {

FocalizationNet FocalizationNet::zeros(int hidden) {
  FocalizationNet net;
  net.U1 = Eigen::MatrixX2d::Zero(hidden, 2);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.U2 = Eigen::VectorXd::Zero(hidden);
  net.b2 = 0.0;
  return net;
}

FocalizationNet FocalizationNet::random_init(int hidden, double scale, Rng& rng) {
  FocalizationNet net = zeros(hidden);
  std::normal_distribution<double> normal(0.0, scale);
  for (int h = 0; h < hidden; ++h)
    for (int c = 0; c < 2; ++c) net.U1(h, c) = normal(rng);
  return net;
}

double kernel_log_prefactor(const KernelParams& p) {
  const double d = KernelParams::kDim;
  return -0.5 * d * std::log(2.0 * p.rho) +
         0.5 * (1.0 - 2.0 * p.rho) * d * std::log(2.0 * std::numbers::pi * p.sigma2);
}

double prob_product_kernel(const Vec2& mu, const Vec2& mu_prime, const KernelParams& p) {
  const double dist2 = (mu - mu_prime).squaredNorm();
  return std::exp(kernel_log_prefactor(p) - p.rho * dist2 / (4.0 * p.sigma2));
}

double focalization_score(const Vec2& mu, const FocalizationNet& net) {
  const Eigen::VectorXd hidden = (net.U1 * mu + net.b1).array().tanh().matrix();
  return std::exp(net.U2.dot(hidden) + net.b2);
}

Eigen::MatrixXd build_L(std::span<const Vec2> means, const KernelParams& p,
                        const FocalizationNet& net, bool diagonal_only) {
  const auto n = static_cast<Eigen::Index>(means.size());
  if (n < 1) throw ContractError("build_L needs at least one phone");
  const double self = std::exp(kernel_log_prefactor(p));
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    L(i, i) = self + focalization_score(means[i], net);
    if (diagonal_only) continue;
    for (Eigen::Index j = 0; j < i; ++j) {
      double k = prob_product_kernel(means[i], means[j], p);
      if (k < kKernelFloor) k = 0.0;
      L(i, j) = k;
      L(j, i) = k;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success) {
    // Report the closest pair of means, the usual culprit.
    Eigen::Index bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j) {
        const double d = (means[i] - means[j]).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    throw NumericalError("L matrix is not numerically positive definite; closest means are phones " +
                         std::to_string(bj + 1) + " and " + std::to_string(bi + 1) +
                         " at distance " + std::to_string(best));
  }
  return L;
}

}  // namespace voweldpp

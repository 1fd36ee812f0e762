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

#include "voweldpp/diffeo.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace voweldpp {

namespace {

Mat2 perturbed_identity(double noise, Rng& rng) {
  std::normal_distribution<double> normal(0.0, noise);
  Mat2 w = Mat2::Identity();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) w(r, c) += normal(rng);
  return w;
}

}  // namespace

DiffeoParams DiffeoParams::near_identity(int depth, double data_radius, double noise, Rng& rng) {
  if (depth < 0 || depth > kMaxDiffeoDepth)
    throw ContractError("diffeomorphism depth must be in [0, 4]");
  DiffeoParams p;
  p.layers.resize(static_cast<std::size_t>(depth));
  if (depth == 1) {
    p.layers[0].W = perturbed_identity(noise, rng);
  } else if (depth >= 2) {
    const double scale = 2.0 * data_radius + 1.0;
    for (int l = 0; l < depth; ++l) {
      Mat2 w = perturbed_identity(noise, rng);
      if (l == 0) w /= scale;
      if (l == depth - 1) w *= scale;
      p.layers[static_cast<std::size_t>(l)].W = w;
    }
  }
  return p;
}

double min_abs_det(const DiffeoParams& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& layer : p.layers) best = std::min(best, std::abs(layer.W.determinant()));
  return best;
}

DiffeoParams zero_like(const DiffeoParams& p) {
  DiffeoParams z;
  z.layers.resize(p.layers.size());
  for (auto& layer : z.layers) {
    layer.W.setZero();
    layer.b.setZero();
  }
  return z;
}

Vec2 diffeo_forward(const DiffeoParams& p, const Vec2& latent) {
  if (p.layers.empty()) return latent;
  Vec2 h = p.layers[0].W * latent + p.layers[0].b;
  for (std::size_t l = 1; l < p.layers.size(); ++l)
    h = p.layers[l].W * h.array().tanh().matrix() + p.layers[l].b;
  return h;
}

InverseTrace trace_inverse(const DiffeoParams& p, const Vec2& v) {
  InverseTrace t;
  const std::size_t k = p.layers.size();
  if (k == 0) {
    t.in_image = true;
    t.latent = v;
    return t;
  }
  t.post_tanh.resize(k - 1);
  t.pre_affine.resize(k);
  Vec2 y = v;
  double log_det = 0.0;
  for (std::size_t l = k - 1; l >= 1; --l) {
    const auto& layer = p.layers[l];
    t.pre_affine[l] = y;
    const Vec2 z = layer.W.partialPivLu().solve(y - layer.b);
    if (!(std::abs(z[0]) < 1.0) || !(std::abs(z[1]) < 1.0)) return t;
    t.post_tanh[l - 1] = z;
    log_det -= std::log(std::abs(layer.W.determinant()));
    log_det -= std::log1p(-z[0] * z[0]) + std::log1p(-z[1] * z[1]);
    y = Vec2(std::atanh(z[0]), std::atanh(z[1]));
  }
  t.pre_affine[0] = y;
  t.latent = p.layers[0].W.partialPivLu().solve(y - p.layers[0].b);
  log_det -= std::log(std::abs(p.layers[0].W.determinant()));
  t.log_det = log_det;
  t.in_image = true;
  return t;
}

namespace {

[[noreturn]] void throw_out_of_image(const DiffeoParams& p, const Vec2& v) {
  Vec2 y = v;
  for (std::size_t l = p.layers.size() - 1; l >= 1; --l) {
    const Vec2 z = p.layers[l].W.partialPivLu().solve(y - p.layers[l].b);
    for (int c = 0; c < 2; ++c)
      if (!(std::abs(z[c]) < 1.0))
        throw DomainError("point outside the image of the diffeomorphism: layer " +
                              std::to_string(l + 1) + " component " + std::to_string(c + 1) +
                              " has tanh value " + std::to_string(z[c]),
                          static_cast<int>(l + 1), c + 1, z[c]);
    y = Vec2(std::atanh(z[0]), std::atanh(z[1]));
  }
  throw DomainError("point outside the image of the diffeomorphism", 0, 0, 0.0);
}

}  // namespace

Vec2 diffeo_inverse(const DiffeoParams& p, const Vec2& v) {
  InverseTrace t = trace_inverse(p, v);
  if (!t.in_image) throw_out_of_image(p, v);
  return t.latent;
}

double log_abs_det_jacobian_inverse(const DiffeoParams& p, const Vec2& v) {
  InverseTrace t = trace_inverse(p, v);
  if (!t.in_image) throw_out_of_image(p, v);
  return t.log_det;
}

void accumulate_inverse_gradient(const DiffeoParams& p, const InverseTrace& trace,
                                 const Vec2& g_latent, double w_logdet, DiffeoParams& grad) {
  const std::size_t k = p.layers.size();
  if (k == 0) return;
  if (!trace.in_image) throw ContractError("gradient requested outside the image");

  // Walk from the latent end back toward v, carrying d f / d y where y is the
  // input of the layer being undone.
  Vec2 g_out = g_latent;
  for (std::size_t l = 0; l < k; ++l) {
    const auto& layer = p.layers[l];
    const Mat2 A = layer.W.inverse();
    const Vec2 centered = trace.pre_affine[l] - layer.b;

    Vec2 g_z = g_out;
    if (l >= 1) {
      // Undo of layer l produced y_{l-1} = atanh(z); g_out is d f / d y_{l-1}.
      const Vec2& z = trace.post_tanh[l - 1];
      for (int c = 0; c < 2; ++c) {
        const double one_minus = 1.0 - z[c] * z[c];
        g_z[c] = g_out[c] / one_minus + w_logdet * 2.0 * z[c] / one_minus;
      }
    }
    const Mat2 g_A = g_z * centered.transpose();
    grad.layers[l].W += -A.transpose() * g_A * A.transpose() - w_logdet * A.transpose();
    grad.layers[l].b += -A.transpose() * g_z;
    g_out = A.transpose() * g_z;
  }
}

double gaussian_logpdf(const Vec2& x, const Vec2& mu, double sigma2) {
  return -std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * (x - mu).squaredNorm() / sigma2;
}

double transformed_logpdf(const DiffeoParams& p, const Vec2& mu, double sigma2, const Vec2& v) {
  const InverseTrace t = trace_inverse(p, v);
  if (!t.in_image) return kNegInf;
  return gaussian_logpdf(t.latent, mu, sigma2) + t.log_det;
}

}  // namespace voweldpp

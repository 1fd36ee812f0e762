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

#include <vector>

#include "voweldpp/types.hpp"

namespace voweldpp {

/// One square layer of the latent-to-acoustic network.
struct DiffeoLayer {
  Mat2 W = Mat2::Identity();
  Vec2 b = Vec2::Zero();
};

/// Invertible 2-2-...-2 tanh network mapping latent space to formant space.
///
/// With k layers the map is
///   h_1 = W_1 x + b_1,   h_l = W_l tanh(h_{l-1}) + b_l,   nu(x) = h_k,
/// so k = 1 is affine and k = 2 is W_2 tanh(W_1 x + b_1) + b_2. An empty
/// layer list is the identity map (the no-network baseline).
struct DiffeoParams {
  std::vector<DiffeoLayer> layers;

  int depth() const { return static_cast<int>(layers.size()); }
  bool is_identity() const { return layers.empty(); }

  static DiffeoParams identity() { return {}; }
  /// Near-identity start on data confined to |x_i| <= data_radius: affine
  /// layers are I + N(0, noise^2); for k >= 2 the first layer shrinks by
  /// the output scale s and the last layer expands by s, so nu(x) ~ x.
  static DiffeoParams near_identity(int depth, double data_radius, double noise, Rng& rng);
};

inline constexpr double kMinAbsDet = 1e-6;
inline constexpr int kMaxDiffeoDepth = 4;

/// Smallest |det W| over the layers (infinity for the identity map).
double min_abs_det(const DiffeoParams& p);

Vec2 diffeo_forward(const DiffeoParams& p, const Vec2& latent);

/// Exact inverse. Throws DomainError if v is outside the image, naming the
/// layer whose tanh pre-image does not exist.
Vec2 diffeo_inverse(const DiffeoParams& p, const Vec2& v);

/// log |det J| of the inverse map at v. Throws DomainError like diffeo_inverse.
double log_abs_det_jacobian_inverse(const DiffeoParams& p, const Vec2& v);

/// Intermediate values of one inverse pass, kept for gradients.
struct InverseTrace {
  bool in_image = false;
  Vec2 latent = Vec2::Zero();
  double log_det = 0.0;
  /// post_tanh[l] is the value tanh(h_l) recovered while undoing layer l+1
  /// (size depth-1); pre_affine[l] is the input to W_l^{-1}(. - b_l).
  std::vector<Vec2> post_tanh;
  std::vector<Vec2> pre_affine;
};

/// Non-throwing inverse pass; in_image is false when v is outside the image.
InverseTrace trace_inverse(const DiffeoParams& p, const Vec2& v);

/// Accumulates into `grad` (same shape as p) the gradient with respect to
/// every W and b of
///   g_latent . nu^{-1}(v) + w_logdet * log|det J_{nu^{-1}}(v)|,
/// given the trace of v. Requires trace.in_image.
void accumulate_inverse_gradient(const DiffeoParams& p, const InverseTrace& trace,
                                 const Vec2& g_latent, double w_logdet, DiffeoParams& grad);

/// DiffeoParams of the same depth with every entry zero.
DiffeoParams zero_like(const DiffeoParams& p);

/// log N(nu^{-1}(v); mu, sigma2 I) + log|det J_{nu^{-1}}(v)|, or -inf when
/// v is outside the image.
double transformed_logpdf(const DiffeoParams& p, const Vec2& mu, double sigma2, const Vec2& v);

/// log N(x; mu, sigma2 I) in two dimensions.
double gaussian_logpdf(const Vec2& x, const Vec2& mu, double sigma2);

}  // namespace voweldpp

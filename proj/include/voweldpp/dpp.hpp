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

/// Rows and columns of `m` listed in `idx`, in that order.
Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& m, std::span<const int> idx);

/// log det of a symmetric positive definite matrix via Cholesky.
/// The empty matrix has log det 0. Throws NumericalError when not PD.
double log_det_spd(const Eigen::MatrixXd& m);

/// log det(L + I), the L-ensemble normalizer.
double dpp_log_normalizer(const Eigen::MatrixXd& L);

/// log P(S) = log det(L_S) - log det(L + I).
double dpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s);

/// Same as dpp_log_prob with a precomputed normalizer.
double dpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s, double log_normalizer);

/// Bernoulli point process: each phone i is included independently with
/// probability L_ii / (1 + L_ii). Reads only the diagonal of L.
double bpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s);
PhoneSubset bpp_sample(const Eigen::MatrixXd& L, Rng& rng);

/// Exact spectral sampler for an L-ensemble. The eigendecomposition is done
/// once at construction so repeated draws are cheap.
class DppSampler {
 public:
  explicit DppSampler(const Eigen::MatrixXd& L);

  PhoneSubset sample(Rng& rng) const;

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// E|S| = sum_i lambda_i / (1 + lambda_i).
  double expected_size() const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

PhoneSubset dpp_sample(const Eigen::MatrixXd& L, Rng& rng);

/// det(L_{s \ {i} + {j}}) / det(L_s), via Schur complements against the
/// shared part s \ {i}. Requires i in s and j not in s.
double conditional_inclusion_weight(const Eigen::MatrixXd& L, const PhoneSubset& s, int i, int j);

/// log of conditional_inclusion_weight.
double log_conditional_inclusion_weight(const Eigen::MatrixXd& L, const PhoneSubset& s, int i,
                                        int j);

/// log sum_{|S| = n} det(L_S): the log elementary symmetric polynomial of
/// degree n in the eigenvalues of L (or in the diagonal, if diagonal_only).
double log_size_mass(const Eigen::MatrixXd& L, int n, bool diagonal_only = false);

/// Sorted copy of an alignment's phone set.
PhoneSubset subset_of(const Alignment& a);

}  // namespace voweldpp

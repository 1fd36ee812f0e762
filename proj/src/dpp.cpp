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

#include "voweldpp/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace voweldpp {

namespace {

void check_subset(const PhoneSubset& s, Eigen::Index n) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= n)
      throw ContractError("phone index " + std::to_string(s[k]) + " out of range");
    if (k > 0 && s[k] <= s[k - 1]) throw ContractError("phone subset must be sorted and unique");
  }
}

}  // namespace

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& m, std::span<const int> idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = m(idx[r], idx[c]);
  return sub;
}

double log_det_spd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double dpp_log_normalizer(const Eigen::MatrixXd& L) {
  Eigen::MatrixXd shifted = L;
  shifted.diagonal().array() += 1.0;
  return log_det_spd(shifted);
}

double dpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s, double log_normalizer) {
  check_subset(s, L.rows());
  return log_det_spd(principal_submatrix(L, s)) - log_normalizer;
}

double dpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s) {
  return dpp_log_prob(L, s, dpp_log_normalizer(L));
}

double bpp_log_prob(const Eigen::MatrixXd& L, const PhoneSubset& s) {
  check_subset(s, L.rows());
  double lp = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) lp -= std::log1p(L(i, i));
  for (int i : s) lp += std::log(L(i, i));
  return lp;
}

PhoneSubset bpp_sample(const Eigen::MatrixXd& L, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PhoneSubset s;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const double p = L(i, i) / (1.0 + L(i, i));
    if (unif(rng) < p) s.push_back(static_cast<int>(i));
  }
  return s;
}

DppSampler::DppSampler(const Eigen::MatrixXd& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of L failed");
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = eig.eigenvectors();
}

double DppSampler::expected_size() const {
  return (eigenvalues_.array() / (1.0 + eigenvalues_.array())).sum();
}

PhoneSubset DppSampler::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = eigenvalues_.size();

  std::vector<Eigen::Index> chosen;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = eigenvalues_[i];
    if (unif(rng) < lam / (1.0 + lam)) chosen.push_back(i);
  }
  auto k = static_cast<Eigen::Index>(chosen.size());
  Eigen::MatrixXd V(n, k);
  for (Eigen::Index c = 0; c < k; ++c) V.col(c) = eigenvectors_.col(chosen[c]);

  PhoneSubset out;
  while (k > 0) {
    // Pick an item with probability proportional to its squared row norm.
    const Eigen::VectorXd weights = V.rowwise().squaredNorm();
    const double total = weights.sum();
    double u = unif(rng) * total;
    Eigen::Index item = n - 1;
    for (Eigen::Index r = 0; r < n; ++r) {
      u -= weights[r];
      if (u < 0.0) {
        item = r;
        break;
      }
    }
    out.push_back(static_cast<int>(item));
    if (k == 1) break;

    // Project the basis onto the complement of e_item and drop one column.
    Eigen::Index pivot = 0;
    V.row(item).cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd pivot_col = V.col(pivot);
    const Eigen::RowVectorXd coeffs = V.row(item) / V(item, pivot);
    V -= pivot_col * coeffs;
    Eigen::MatrixXd reduced(n, k - 1);
    for (Eigen::Index c = 0, d = 0; c < k; ++c)
      if (c != pivot) reduced.col(d++) = V.col(c);
    reduced.row(item).setZero();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(reduced);
    V = qr.householderQ() * Eigen::MatrixXd::Identity(n, k - 1);
    --k;
  }
  std::sort(out.begin(), out.end());
  return out;
}

PhoneSubset dpp_sample(const Eigen::MatrixXd& L, Rng& rng) { return DppSampler(L).sample(rng); }

double log_conditional_inclusion_weight(const Eigen::MatrixXd& L, const PhoneSubset& s, int i,
                                        int j) {
  const auto n = L.rows();
  if (i < 0 || i >= n || j < 0 || j >= n) throw ContractError("phone index out of range");
  if (i == j) throw ContractError("swap requires two distinct phones");
  if (!std::binary_search(s.begin(), s.end(), i)) throw ContractError("phone i must be in s");
  if (std::binary_search(s.begin(), s.end(), j)) throw ContractError("phone j must not be in s");

  PhoneSubset rest;
  rest.reserve(s.size());
  for (int x : s)
    if (x != i) rest.push_back(x);

  auto schur = [&](const Eigen::LLT<Eigen::MatrixXd>* llt, int x) {
    double value = L(x, x);
    if (llt != nullptr) {
      Eigen::VectorXd cross(static_cast<Eigen::Index>(rest.size()));
      for (std::size_t r = 0; r < rest.size(); ++r) cross[r] = L(rest[r], x);
      const Eigen::VectorXd solved = llt->matrixL().solve(cross);
      value -= solved.squaredNorm();
    }
    return value;
  };

  if (rest.empty()) return std::log(L(j, j)) - std::log(L(i, i));
  Eigen::LLT<Eigen::MatrixXd> llt(principal_submatrix(L, rest));
  if (llt.info() != Eigen::Success) throw NumericalError("principal minor is not positive definite");
  return std::log(schur(&llt, j)) - std::log(schur(&llt, i));
}

double conditional_inclusion_weight(const Eigen::MatrixXd& L, const PhoneSubset& s, int i,
                                    int j) {
  return std::exp(log_conditional_inclusion_weight(L, s, i, j));
}

double log_size_mass(const Eigen::MatrixXd& L, int n, bool diagonal_only) {
  const Eigen::Index size = L.rows();
  if (n < 0 || n > size) return kNegInf;
  Eigen::VectorXd lams;
  if (diagonal_only) {
    lams = L.diagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of L failed");
    lams = eig.eigenvalues();
  }
  std::vector<double> e(static_cast<std::size_t>(n) + 1, kNegInf);
  e[0] = 0.0;
  for (Eigen::Index m = 0; m < size; ++m) {
    const double log_lam = std::log(std::max(lams[m], std::numeric_limits<double>::min()));
    const int top = static_cast<int>(std::min<Eigen::Index>(n, m + 1));
    for (int k = top; k >= 1; --k) e[k] = log_add_exp(e[k], e[k - 1] + log_lam);
  }
  return e[n];
}

PhoneSubset subset_of(const Alignment& a) {
  PhoneSubset s(a.begin(), a.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace voweldpp

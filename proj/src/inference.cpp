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

#include "voweldpp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voweldpp/dpp.hpp"
#include "voweldpp/parallel.hpp"

namespace voweldpp {

Eigen::MatrixXd emission_table(const UniversalModel& m, const LanguageInventory& lang) {
  const auto n = static_cast<Eigen::Index>(lang.size());
  const Eigen::Index N = m.num_phones();
  Eigen::MatrixXd table(n, N);
  for (Eigen::Index k = 0; k < n; ++k) {
    const InverseTrace t = trace_inverse(m.diffeo, lang.pronunciations[k]);
    for (Eigen::Index j = 0; j < N; ++j)
      table(k, j) = t.in_image ? gaussian_logpdf(t.latent, m.means[j], m.sigma2) + t.log_det
                               : kNegInf;
  }
  return table;
}

LanguageSampler::LanguageSampler(const Eigen::MatrixXd& L, bool diagonal_only,
                                 Eigen::MatrixXd emissions)
    : L_(&L), diagonal_only_(diagonal_only), emissions_(std::move(emissions)) {}

bool LanguageSampler::update(Alignment& a, int k, Rng& rng, const GibbsOptions& opts) const {
  const int N = static_cast<int>(L_->rows());
  const int n = static_cast<int>(a.size());
  if (n >= N) return false;

  std::vector<char> used(static_cast<std::size_t>(N), 0);
  for (int j : a) used[j] = 1;
  const int current = a[k];

  // Slot log-likelihood per phone; a row that is -inf everywhere (point
  // outside the image) carries no information, so the proposal is uniform.
  auto row = emissions_.row(k);
  const bool informative = row.maxCoeff() > kNegInf;
  auto loglik = [&](int j) { return informative ? row[j] : 0.0; };

  std::vector<int> candidates;
  std::vector<double> logw;
  candidates.reserve(static_cast<std::size_t>(N - n));
  for (int j = 0; j < N; ++j)
    if (!used[j]) {
      candidates.push_back(j);
      logw.push_back(loglik(j));
    }
  const double log_z = log_sum_exp(logw);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  int proposal = candidates.back();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    u -= std::exp(logw[c] - log_z);
    if (u < 0.0) {
      proposal = candidates[c];
      break;
    }
  }

  double log_det_ratio = 0.0;
  if (diagonal_only_) {
    log_det_ratio = std::log((*L_)(proposal, proposal)) - std::log((*L_)(current, current));
  } else {
    log_det_ratio = log_conditional_inclusion_weight(*L_, subset_of(a), current, proposal);
  }

  double log_accept = 0.0;
  if (opts.barker_heuristic) {
    const double keep = loglik(current);
    const double swap = loglik(proposal) + log_det_ratio;
    log_accept = swap - log_add_exp(keep, swap);
  } else {
    // Reverse proposal normalizer: candidates minus the proposal plus current.
    std::vector<double> reverse;
    reverse.reserve(logw.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (candidates[c] != proposal) reverse.push_back(logw[c]);
    reverse.push_back(loglik(current));
    // Likelihood terms cancel against the proposal probabilities.
    log_accept = log_det_ratio + log_z - log_sum_exp(reverse);
  }

  if (log_accept >= 0.0 || std::log(unif(rng)) < log_accept) {
    a[k] = proposal;
#ifndef NDEBUG
    validate_alignment(a, a.size(), N);
#endif
    return true;
  }
  return false;
}

int LanguageSampler::sweep(Alignment& a, Rng& rng, const GibbsOptions& opts) const {
  std::vector<int> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  if (opts.random_scan) std::shuffle(order.begin(), order.end(), rng);
  int accepted = 0;
  for (int k : order) accepted += update(a, k, rng, opts) ? 1 : 0;
  return accepted;
}

Alignment LanguageSampler::greedy_init(Rng& rng) const {
  const auto n = static_cast<int>(emissions_.rows());
  const auto N = static_cast<int>(emissions_.cols());
  if (n > N) throw ContractError("language has more vowels than phones");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> used(static_cast<std::size_t>(N), 0);
  Alignment a(static_cast<std::size_t>(n), -1);
  for (int k : order) {
    int best = -1;
    for (int j = 0; j < N; ++j) {
      if (used[j]) continue;
      if (best < 0 || emissions_(k, j) > emissions_(k, best)) best = j;
    }
    a[k] = best;
    used[best] = 1;
  }
  return a;
}

Alignment gibbs_update_one(const UniversalModel& m, const LanguageInventory& lang,
                           const Alignment& a, int k, Rng& rng, const GibbsOptions& opts) {
  validate_alignment(a, lang.size(), m.num_phones());
  const Eigen::MatrixXd L = m.L();
  LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, lang));
  Alignment out = a;
  sampler.update(out, k, rng, opts);
  return out;
}

ChainState init_alignments(const UniversalModel& m, const Corpus& corpus, std::uint64_t seed) {
  ChainState state;
  state.seed = seed;
  state.move_rng.seed(derive_seed(seed, 0xFFFFFFFFull));
  const Eigen::MatrixXd L = m.L();
  for (std::size_t l = 0; l < corpus.size(); ++l) {
    const auto& lang = corpus.languages[l];
    if (static_cast<int>(lang.size()) > m.num_phones())
      throw ContractError("language '" + lang.language_id + "' has " +
                          std::to_string(lang.size()) + " vowels but the model has only " +
                          std::to_string(m.num_phones()) + " phones");
    Rng rng(derive_seed(seed, l));
    LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, lang));
    state.alignments.push_back(sampler.greedy_init(rng));
    state.language_rngs.push_back(rng);
  }
  return state;
}

std::vector<std::vector<Alignment>> e_step(const UniversalModel& m, const Corpus& corpus,
                                           ChainState& state, int sweeps,
                                           const GibbsOptions& opts, int threads) {
  if (state.alignments.size() != corpus.size())
    throw ContractError("chain state does not match the corpus");
  const Eigen::MatrixXd L = m.L();
  const std::size_t M = corpus.size();

  std::vector<std::vector<Alignment>> per_language(M);
  std::vector<long> proposals(M, 0), accepted(M, 0);
  parallel_for(M, threads, [&](std::size_t l) {
    LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, corpus.languages[l]));
    Alignment& a = state.alignments[l];
    validate_alignment(a, corpus.languages[l].size(), m.num_phones());
    for (int s = 0; s < sweeps; ++s) {
      accepted[l] += sampler.sweep(a, state.language_rngs[l], opts);
      proposals[l] += static_cast<long>(a.size());
      per_language[l].push_back(a);
    }
  });

  std::vector<std::vector<Alignment>> snapshots(static_cast<std::size_t>(sweeps));
  for (int s = 0; s < sweeps; ++s) {
    snapshots[s].reserve(M);
    for (std::size_t l = 0; l < M; ++l) snapshots[s].push_back(per_language[l][s]);
  }
  for (std::size_t l = 0; l < M; ++l) {
    state.proposals += proposals[l];
    state.accepted += accepted[l];
  }
  state.sweep_count += sweeps;
  return snapshots;
}

Vec2 draw_standard_normal_mean(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double x = normal(rng);
  const double y = normal(rng);
  return {x, y};
}

namespace {

double subset_normalizer(const UniversalModel& m) {
  const Eigen::MatrixXd L = m.L();
  if (m.diagonal_only()) return L.diagonal().array().log1p().sum();
  return dpp_log_normalizer(L);
}

std::vector<int> unused_phones(int N, const std::vector<Alignment>& alignments) {
  std::vector<char> used(static_cast<std::size_t>(N), 0);
  for (const auto& a : alignments)
    for (int j : a) used[j] = 1;
  std::vector<int> out;
  for (int j = 0; j < N; ++j)
    if (!used[j]) out.push_back(j);
  return out;
}

}  // namespace

RjStats rjmcmc_resample_N(UniversalModel& m, const Corpus& corpus, ChainState& state, int moves,
                          const MeanDraw& draw_mean) {
  RjStats stats;
  const double M = static_cast<double>(corpus.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double log_norm = subset_normalizer(m);
  Rng& rng = state.move_rng;

  for (int move = 0; move < moves; ++move) {
    const int N = m.num_phones();
    const std::vector<int> dead = unused_phones(N, state.alignments);
    const auto d = static_cast<double>(dead.size());

    if (unif(rng) < 0.5) {
      ++stats.births_proposed;
      std::uniform_int_distribution<int> where(0, N);
      const int pos = where(rng);
      const Vec2 mu = draw_mean(rng);
      UniversalModel proposed = m;
      proposed.means.insert(proposed.means.begin() + pos, mu);
      double new_norm = 0.0;
      try {
        new_norm = subset_normalizer(proposed);
      } catch (const NumericalError&) {
        continue;
      }
      // Poisson ratio lambda/(N+1) and the position choice 1/(N+1) cancel;
      // the mean's prior density cancels its proposal density.
      const double log_accept = std::log(m.lambda) + M * (log_norm - new_norm) - std::log(d + 1.0);
      if (log_accept >= 0.0 || std::log(unif(rng)) < log_accept) {
        m = std::move(proposed);
        log_norm = new_norm;
        for (auto& a : state.alignments)
          for (int& j : a)
            if (j >= pos) ++j;
        ++stats.births_accepted;
      }
    } else {
      ++stats.deaths_proposed;
      if (dead.empty() || N <= 1) continue;
      std::uniform_int_distribution<std::size_t> pick(0, dead.size() - 1);
      const int victim = dead[pick(rng)];
      UniversalModel proposed = m;
      proposed.means.erase(proposed.means.begin() + victim);
      const double new_norm = subset_normalizer(proposed);
      const double log_accept = std::log(d) + M * (log_norm - new_norm) - std::log(m.lambda);
      if (log_accept >= 0.0 || std::log(unif(rng)) < log_accept) {
        m = std::move(proposed);
        log_norm = new_norm;
        for (auto& a : state.alignments)
          for (int& j : a)
            if (j > victim) --j;
        ++stats.deaths_accepted;
      }
    }
  }
  return stats;
}

}  // namespace voweldpp

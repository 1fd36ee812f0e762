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

#include "voweldpp/learning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "voweldpp/dpp.hpp"
#include "voweldpp/log.hpp"
#include "voweldpp/parallel.hpp"

namespace voweldpp {

ParameterLayout::ParameterLayout(const UniversalModel& m)
    : num_phones(m.num_phones()), depth(m.diffeo.depth()), hidden(m.foc.hidden()) {}

std::size_t ParameterLayout::size() const {
  return foc_offset() + 4 * static_cast<std::size_t>(hidden) + 1;
}

std::string ParameterLayout::name(std::size_t index) const {
  std::ostringstream out;
  if (index < diffeo_offset()) {
    out << "means[" << index / 2 << "]." << (index % 2 == 0 ? "x" : "y");
  } else if (index < foc_offset()) {
    const std::size_t rel = index - diffeo_offset();
    const std::size_t layer = rel / 6, within = rel % 6;
    if (within < 4)
      out << "diffeo[" << layer << "].W(" << within / 2 << "," << within % 2 << ")";
    else
      out << "diffeo[" << layer << "].b(" << within - 4 << ")";
  } else {
    const std::size_t rel = index - foc_offset();
    const auto H = static_cast<std::size_t>(hidden);
    if (rel < 2 * H) out << "foc.U1(" << rel / 2 << "," << rel % 2 << ")";
    else if (rel < 3 * H) out << "foc.b1(" << rel - 2 * H << ")";
    else if (rel < 4 * H) out << "foc.U2(" << rel - 3 * H << ")";
    else out << "foc.b2";
  }
  return out.str();
}

std::vector<double> pack_parameters(const UniversalModel& m) {
  const ParameterLayout layout(m);
  std::vector<double> flat;
  flat.reserve(layout.size());
  for (const auto& mu : m.means) {
    flat.push_back(mu.x());
    flat.push_back(mu.y());
  }
  for (const auto& layer : m.diffeo.layers) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) flat.push_back(layer.W(r, c));
    flat.push_back(layer.b.x());
    flat.push_back(layer.b.y());
  }
  for (int h = 0; h < layout.hidden; ++h) {
    flat.push_back(m.foc.U1(h, 0));
    flat.push_back(m.foc.U1(h, 1));
  }
  for (int h = 0; h < layout.hidden; ++h) flat.push_back(m.foc.b1[h]);
  for (int h = 0; h < layout.hidden; ++h) flat.push_back(m.foc.U2[h]);
  flat.push_back(m.foc.b2);
  return flat;
}

void unpack_parameters(std::span<const double> flat, UniversalModel& m) {
  const ParameterLayout layout(m);
  if (flat.size() != layout.size()) throw ContractError("parameter vector has the wrong size");
  std::size_t i = 0;
  for (auto& mu : m.means) {
    mu.x() = flat[i++];
    mu.y() = flat[i++];
  }
  for (auto& layer : m.diffeo.layers) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) layer.W(r, c) = flat[i++];
    layer.b.x() = flat[i++];
    layer.b.y() = flat[i++];
  }
  for (int h = 0; h < layout.hidden; ++h) {
    m.foc.U1(h, 0) = flat[i++];
    m.foc.U1(h, 1) = flat[i++];
  }
  for (int h = 0; h < layout.hidden; ++h) m.foc.b1[h] = flat[i++];
  for (int h = 0; h < layout.hidden; ++h) m.foc.U2[h] = flat[i++];
  m.foc.b2 = flat[i++];
}

namespace {

double foc_weight_norm2(const FocalizationNet& foc) {
  return foc.U1.squaredNorm() + foc.b1.squaredNorm() + foc.U2.squaredNorm();
}

struct LanguagePart {
  double value = 0.0;
  // Gradient of the emission terms w.r.t. means (2N) and diffeo (6k).
  std::vector<double> grad;
  // Per sample: the subset and the inverse of L restricted to it.
  std::vector<PhoneSubset> subsets;
  std::vector<Eigen::MatrixXd> inverses;
};

ObjectiveGradient evaluate(const UniversalModel& m, const Corpus& corpus,
                           std::span<const std::vector<Alignment>> samples, int threads,
                           double weight_decay, bool want_grad) {
  const ParameterLayout layout(m);
  const int N = m.num_phones();
  const std::size_t M = corpus.size();
  const std::size_t S = samples.size();
  if (S == 0) throw ContractError("M-step needs at least one alignment sample");
  for (const auto& sample : samples)
    if (sample.size() != M) throw ContractError("sample does not cover every language");

  ObjectiveGradient out;
  if (want_grad) out.gradient.assign(layout.size(), 0.0);
  out.value = log_prior_N(m) + log_prior_means(m) - 0.5 * weight_decay * foc_weight_norm2(m.foc);

  const Eigen::MatrixXd L = m.L();
  const bool diag = m.diagonal_only();
  const double log_norm = diag ? L.diagonal().array().log1p().sum() : dpp_log_normalizer(L);
  const double inv_s = 1.0 / static_cast<double>(S);

  std::vector<LanguagePart> parts(M);
  parallel_for(M, threads, [&](std::size_t l) {
    const auto& lang = corpus.languages[l];
    LanguagePart& part = parts[l];
    if (want_grad) part.grad.assign(layout.foc_offset(), 0.0);
    DiffeoParams dgrad = zero_like(m.diffeo);

    for (std::size_t k = 0; k < lang.size(); ++k) {
      const InverseTrace t = trace_inverse(m.diffeo, lang.pronunciations[k]);
      if (!t.in_image) {
        part.value = kNegInf;
        return;
      }
      double emit = t.log_det;
      Vec2 g_latent = Vec2::Zero();
      for (std::size_t s = 0; s < S; ++s) {
        const int j = samples[s][l][k];
        const Vec2 diff = t.latent - m.means[j];
        emit += inv_s * gaussian_logpdf(t.latent, m.means[j], m.sigma2);
        if (want_grad) {
          const Vec2 g = inv_s * diff / m.sigma2;
          part.grad[2 * j] += g.x();
          part.grad[2 * j + 1] += g.y();
          g_latent -= g;
        }
      }
      part.value += emit;
      if (want_grad) accumulate_inverse_gradient(m.diffeo, t, g_latent, 1.0, dgrad);
    }
    if (want_grad) {
      std::size_t i = layout.diffeo_offset();
      for (const auto& layer : dgrad.layers) {
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) part.grad[i++] = layer.W(r, c);
        part.grad[i++] = layer.b.x();
        part.grad[i++] = layer.b.y();
      }
    }

    for (std::size_t s = 0; s < S; ++s) {
      const PhoneSubset subset = subset_of(samples[s][l]);
      if (diag) {
        for (int i : subset) part.value += inv_s * std::log(L(i, i));
      } else {
        const Eigen::MatrixXd sub = principal_submatrix(L, subset);
        Eigen::LLT<Eigen::MatrixXd> llt(sub);
        if (llt.info() != Eigen::Success) throw NumericalError("principal minor not PD");
        part.value += inv_s * 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        if (want_grad) part.inverses.push_back(llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.cols())));
      }
      if (want_grad) part.subsets.push_back(subset);
    }
  });

  for (std::size_t l = 0; l < M; ++l) {
    out.value += parts[l].value;
    if (want_grad && std::isfinite(parts[l].value))
      for (std::size_t i = 0; i < parts[l].grad.size(); ++i) out.gradient[i] += parts[l].grad[i];
  }
  out.value -= static_cast<double>(M) * log_norm;
  if (!want_grad || !std::isfinite(out.value)) return out;

  // d objective / d L, summed over both triangles.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t l = 0; l < M; ++l) {
    const LanguagePart& part = parts[l];
    for (std::size_t s = 0; s < part.subsets.size(); ++s) {
      const PhoneSubset& subset = part.subsets[s];
      if (diag) {
        for (int i : subset) G(i, i) += inv_s / L(i, i);
      } else {
        const Eigen::MatrixXd& inv = part.inverses[s];
        for (std::size_t r = 0; r < subset.size(); ++r)
          for (std::size_t c = 0; c < subset.size(); ++c)
            G(subset[r], subset[c]) += inv_s * inv(static_cast<Eigen::Index>(r),
                                                   static_cast<Eigen::Index>(c));
      }
    }
  }
  if (diag) {
    for (int i = 0; i < N; ++i) G(i, i) -= static_cast<double>(M) / (1.0 + L(i, i));
  } else {
    Eigen::MatrixXd shifted = L;
    shifted.diagonal().array() += 1.0;
    G -= static_cast<double>(M) *
         shifted.llt().solve(Eigen::MatrixXd::Identity(N, N));
  }

  auto& grad = out.gradient;
  // Off-diagonal kernel entries depend on pairs of means.
  if (!diag) {
    const double coef = -m.rho / (2.0 * m.sigma2);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (i == j || L(i, j) == 0.0) continue;
        const Vec2 g = 2.0 * G(i, j) * L(i, j) * coef * (m.means[i] - m.means[j]);
        grad[2 * i] += g.x();
        grad[2 * i + 1] += g.y();
      }
  }

  // Focalization enters the diagonal.
  const int H = layout.hidden;
  const std::size_t fo = layout.foc_offset();
  for (int i = 0; i < N; ++i) {
    const Vec2& mu = m.means[i];
    const Eigen::VectorXd t = (m.foc.U1 * mu + m.foc.b1).array().tanh().matrix();
    const double F = std::exp(m.foc.U2.dot(t) + m.foc.b2);
    const double w = G(i, i) * F;
    for (int h = 0; h < H; ++h) {
      const double back = w * m.foc.U2[h] * (1.0 - t[h] * t[h]);
      grad[fo + 2 * h] += back * mu.x();
      grad[fo + 2 * h + 1] += back * mu.y();
      grad[fo + 2 * H + h] += back;
      grad[fo + 3 * H + h] += w * t[h];
      grad[2 * i] += back * m.foc.U1(h, 0);
      grad[2 * i + 1] += back * m.foc.U1(h, 1);
    }
    grad[fo + 4 * H] += w;
  }

  for (int i = 0; i < N; ++i) {
    grad[2 * i] -= m.means[i].x();
    grad[2 * i + 1] -= m.means[i].y();
  }
  if (weight_decay > 0.0) {
    for (int h = 0; h < H; ++h) {
      grad[fo + 2 * h] -= weight_decay * m.foc.U1(h, 0);
      grad[fo + 2 * h + 1] -= weight_decay * m.foc.U1(h, 1);
      grad[fo + 2 * H + h] -= weight_decay * m.foc.b1[h];
      grad[fo + 3 * H + h] -= weight_decay * m.foc.U2[h];
    }
  }
  return out;
}

}  // namespace

double map_objective(const UniversalModel& m, const Corpus& corpus,
                     std::span<const std::vector<Alignment>> samples, int threads,
                     double weight_decay) {
  return evaluate(m, corpus, samples, threads, weight_decay, false).value;
}

ObjectiveGradient map_objective_gradient(const UniversalModel& m, const Corpus& corpus,
                                         std::span<const std::vector<Alignment>> samples,
                                         int threads, double weight_decay) {
  return evaluate(m, corpus, samples, threads, weight_decay, true);
}

MStepStats m_step(UniversalModel& m, const Corpus& corpus,
                  std::span<const std::vector<Alignment>> samples, const TrainConfig& cfg) {
  constexpr double kDecay = 0.9;
  constexpr double kEps = 1e-8;
  constexpr int kMaxHalvings = 20;

  MStepStats stats;
  const ParameterLayout layout(m);
  std::vector<double> theta = pack_parameters(m);
  std::vector<double> rms(theta.size(), 0.0);
  UniversalModel trial = m;

  ObjectiveGradient current =
      map_objective_gradient(m, corpus, samples, cfg.threads, cfg.weight_decay);
  stats.objective_before = current.value;
  stats.objective_after = current.value;
  if (!std::isfinite(current.value)) return stats;

  for (int it = 0; it < cfg.m_sgd_iters; ++it) {
    for (std::size_t i = 0; i < theta.size(); ++i)
      if (!std::isfinite(current.gradient[i]))
        throw NumericalError("non-finite gradient for parameter " + layout.name(i));

    std::vector<double> direction(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g2 = current.gradient[i] * current.gradient[i];
      rms[i] = it == 0 ? g2 : kDecay * rms[i] + (1.0 - kDecay) * g2;
      direction[i] = current.gradient[i] / (std::sqrt(rms[i]) + kEps);
    }

    double step = cfg.learning_rate;
    bool accepted = false;
    std::vector<double> candidate(theta.size());
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, step *= 0.5) {
      for (std::size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] + step * direction[i];
      unpack_parameters(candidate, trial);
      if (min_abs_det(trial.diffeo) <= kMinAbsDet) continue;
      double value = kNegInf;
      try {
        value = map_objective(trial, corpus, samples, cfg.threads, cfg.weight_decay);
      } catch (const NumericalError&) {
        continue;
      }
      if (std::isfinite(value) && value >= current.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++stats.steps_skipped;
      continue;
    }
    theta = candidate;
    current = map_objective_gradient(trial, corpus, samples, cfg.threads, cfg.weight_decay);
    ++stats.steps_taken;
  }
  unpack_parameters(theta, m);
  stats.objective_after = current.value;
  return stats;
}

namespace {

constexpr int kKmeansRestarts = 5;
constexpr int kLloydIters = 100;

std::vector<Vec2> kmeanspp_seed(const std::vector<Vec2>& points, int k, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  std::vector<Vec2> centers;
  for (int i = 0; i < k; ++i) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (i > 0 && !(total > 0.0)) {
      // Fewer distinct points than phones.
      centers.push_back(draw_standard_normal_mean(rng));
      continue;
    }
    std::size_t pick = points.size() - 1;
    if (i == 0) {
      pick = std::uniform_int_distribution<std::size_t>(0, points.size() - 1)(rng);
    } else {
      double u = unif(rng) * total;
      for (std::size_t p = 0; p < points.size(); ++p) {
        u -= d2[p];
        if (u < 0.0) {
          pick = p;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
    for (std::size_t p = 0; p < points.size(); ++p)
      d2[p] = std::min(d2[p], (points[p] - points[pick]).squaredNorm());
  }
  return centers;
}

// Returns the final sum of squared distances. Empty clusters keep their center.
double lloyd(const std::vector<Vec2>& points, std::vector<Vec2>& centers) {
  std::vector<int> assign(points.size(), -1);
  double sse = 0.0;
  for (int it = 0; it < kLloydIters; ++it) {
    bool changed = false;
    sse = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = (points[p] - centers[c]).squaredNorm();
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      sse += bd;
      if (assign[p] != best) {
        assign[p] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vec2> sum(centers.size(), Vec2::Zero());
    std::vector<int> count(centers.size(), 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      sum[assign[p]] += points[p];
      ++count[assign[p]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (count[c] > 0) centers[c] = sum[c] / count[c];
  }
  return sse;
}

}  // namespace

UniversalModel initial_model(const Corpus& corpus, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0xA11CEull));
  UniversalModel m;
  m.sigma2 = cfg.sigma2;
  m.rho = cfg.rho;
  m.lambda = cfg.lambda;
  m.prior = cfg.prior;
  m.foc = FocalizationNet::random_init(cfg.focal_hidden, 0.5, rng);

  double radius = 1.0;
  std::vector<Vec2> points;
  for (const auto& lang : corpus.languages)
    for (const auto& v : lang.pronunciations) {
      points.push_back(v);
      radius = std::max(radius, v.cwiseAbs().maxCoeff());
    }
  m.diffeo = DiffeoParams::near_identity(cfg.diffeo_layers, radius, 0.01, rng);
  for (auto& p : points) p = diffeo_inverse(m.diffeo, p);

  const int max_n = static_cast<int>(corpus.max_inventory_size());
  const int N = cfg.n_phones ? *cfg.n_phones : std::max(2 * max_n, 2);
  if (N < max_n)
    throw ContractError("model has " + std::to_string(N) + " phones but a language has " +
                        std::to_string(max_n) + " vowels");

  // k-means++ seeding plus Lloyd refinement in latent space, best of a few
  // restarts by within-cluster sum of squares.
  if (points.empty()) {
    for (int i = 0; i < N; ++i) m.means.push_back(draw_standard_normal_mean(rng));
    return m;
  }
  double best_sse = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kKmeansRestarts; ++restart) {
    std::vector<Vec2> centers = kmeanspp_seed(points, N, rng);
    const double sse = lloyd(points, centers);
    if (sse < best_sse) {
      best_sse = sse;
      m.means = std::move(centers);
    }
  }
  return m;
}

TrainResult map_em(const Corpus& corpus, const TrainConfig& cfg,
                   const std::function<void(const TraceRecord&)>& on_iteration) {
  if (cfg.e_samples < 1 || cfg.m_sgd_iters < 0 || cfg.em_iters < 0)
    throw ContractError("invalid iteration counts");
  TrainResult result;
  result.model = initial_model(corpus, cfg);
  UniversalModel& m = result.model;
  ChainState state = init_alignments(m, corpus, derive_seed(cfg.seed, 0xE57Eull));

  for (int it = 0; it < cfg.em_iters; ++it) {
    TraceRecord rec;
    rec.iteration = it + 1;
    if (!cfg.n_phones) {
      const RjStats rj = rjmcmc_resample_N(m, corpus, state, cfg.rj_moves);
      rec.rj_acceptance = rj.acceptance_rate();
    }
    const long prop0 = state.proposals, acc0 = state.accepted;
    const auto samples = e_step(m, corpus, state, cfg.e_samples, cfg.gibbs, cfg.threads);
    const long dp = state.proposals - prop0;
    rec.gibbs_acceptance = dp == 0 ? 0.0 : static_cast<double>(state.accepted - acc0) / dp;

    const MStepStats ms = m_step(m, corpus, samples, cfg);
    rec.objective = ms.objective_after;
    rec.num_phones = m.num_phones();
    log::debug("em iteration {}: objective {:.4f} N={} gibbs acc {:.3f}", rec.iteration,
               rec.objective, rec.num_phones, rec.gibbs_acceptance);
    result.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }
  result.final_alignments = state.alignments;
  return result;
}

LabelAlignment alignments_from_labels(const Corpus& corpus) {
  std::set<std::string> symbols;
  for (const auto& lang : corpus.languages) {
    if (!lang.fully_labeled())
      throw ValidationError("language '" + lang.language_id + "' has unlabeled vowels");
    std::set<std::string> seen;
    for (const auto& label : lang.labels) {
      if (!seen.insert(label).second)
        throw ValidationError("language '" + lang.language_id + "' uses symbol '" + label +
                              "' twice");
      symbols.insert(label);
    }
  }
  LabelAlignment out;
  out.symbols.assign(symbols.begin(), symbols.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < out.symbols.size(); ++i)
    index[out.symbols[i]] = static_cast<int>(i);
  for (const auto& lang : corpus.languages) {
    Alignment a;
    for (const auto& label : lang.labels) a.push_back(index.at(label));
    out.alignments.push_back(std::move(a));
  }
  return out;
}

TrainResult supervised_fit(const Corpus& corpus, const TrainConfig& cfg) {
  LabelAlignment labels = alignments_from_labels(corpus);
  TrainConfig fixed = cfg;
  fixed.n_phones = static_cast<int>(labels.symbols.size());

  TrainResult result;
  result.model = initial_model(corpus, fixed);
  UniversalModel& m = result.model;
  // Start each phone at the centroid of its labeled vowels in latent space.
  std::vector<Vec2> sums(labels.symbols.size(), Vec2::Zero());
  std::vector<int> counts(labels.symbols.size(), 0);
  for (std::size_t l = 0; l < corpus.size(); ++l)
    for (std::size_t k = 0; k < corpus.languages[l].size(); ++k) {
      const int j = labels.alignments[l][k];
      sums[j] += diffeo_inverse(m.diffeo, corpus.languages[l].pronunciations[k]);
      ++counts[j];
    }
  for (std::size_t j = 0; j < sums.size(); ++j) m.means[j] = sums[j] / counts[j];

  const std::vector<std::vector<Alignment>> samples{labels.alignments};
  for (int it = 0; it < cfg.em_iters; ++it) {
    const MStepStats ms = m_step(m, corpus, samples, fixed);
    TraceRecord rec;
    rec.iteration = it + 1;
    rec.objective = ms.objective_after;
    rec.num_phones = m.num_phones();
    result.trace.push_back(rec);
  }
  result.final_alignments = labels.alignments;
  return result;
}

}  // namespace voweldpp

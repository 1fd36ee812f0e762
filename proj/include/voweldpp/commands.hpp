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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voweldpp/corpus.hpp"
#include "voweldpp/eval.hpp"
#include "voweldpp/learning.hpp"
#include "voweldpp/model_io.hpp"

namespace voweldpp {

/// Which languages of a corpus a command works on. The train/dev/test
/// parts are recomputed from the split fractions and seed stored in the
/// model file, so they match what training saw.
enum class CorpusPart { kTrain, kDev, kTest, kAll };

CorpusPart parse_part(const std::string& name);

struct TrainOptions {
  std::filesystem::path corpus;
  std::filesystem::path out = "model.json";
  std::filesystem::path trace = "trace.jsonl";
  TrainConfig config;
  SplitFractions split;
};

/// Loads, deduplicates and splits the corpus, trains on the train part and
/// writes the model file and the per-iteration trace.
ModelFile cmd_train(const TrainOptions& opts);

/// The requested part of `corpus_path`, normalized with the model's
/// statistics.
Corpus select_part(const ModelFile& model, const std::filesystem::path& corpus_path,
                   CorpusPart part);

struct EvalCommandOptions {
  std::filesystem::path model;
  std::filesystem::path corpus;
  CorpusPart part = CorpusPart::kTest;
  std::filesystem::path out = "report.json";
  /// Per-language table; skipped when empty.
  std::filesystem::path csv;
  bool cloze = true;
  EvalOptions eval;
};

EvalReport cmd_eval(const EvalCommandOptions& opts);

struct ClozeCommandOptions {
  std::filesystem::path model;
  std::filesystem::path corpus;
  CorpusPart part = CorpusPart::kTest;
  std::filesystem::path out = "cloze.csv";
  int hidden = 1;
  EvalOptions eval;
};

/// Writes one row per held-out vowel: truth and posterior-mean prediction
/// in Hz, plus the expected error.
void cmd_cloze(const ClozeCommandOptions& opts);

struct GenerateOptions {
  std::filesystem::path out = "synthetic.csv";
  /// Ground-truth model, written in the model-file format.
  std::filesystem::path truth = "truth.json";
  GenerateConfig config;
  int diffeo_layers = 0;
  int focal_hidden = 16;
  /// Affine map from model space to Hz.
  Normalization hz;
};

/// Default model-space to Hz map used by `generate`.
Normalization default_hz_map();

GeneratedCorpus cmd_generate(const GenerateOptions& opts);

struct SweepRow {
  double sigma2 = 0.0;
  double rho = 0.0;
  double dev_cross_entropy = 0.0;
};

struct SweepOptions {
  std::filesystem::path corpus;
  std::filesystem::path out = "sweep.csv";
  std::vector<double> sigma2_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> rho_grid{0.25, 0.5, 1.0, 2.0, 4.0};
  TrainConfig config;
  SplitFractions split;
  EvalOptions eval;
};

/// Trains one model per (sigma2, rho) cell and scores it on the dev part.
/// Rows come back sorted by dev cross-entropy, best first.
std::vector<SweepRow> cmd_sweep(const SweepOptions& opts);

struct PlotOptions {
  std::filesystem::path model;
  std::filesystem::path corpus;
  CorpusPart part = CorpusPart::kTrain;
  std::filesystem::path out = "plot.csv";
  std::filesystem::path svg = "plot.svg";
  EvalOptions eval;
};

struct PlotPoint {
  std::string language_id;
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  int phone = 0;  // 1-based
};

/// Every pronunciation of the selected part with its inferred phone. For
/// languages the model was trained on this is the final E-step alignment;
/// others get a posterior sample.
std::vector<PlotPoint> cmd_plot(const PlotOptions& opts);

/// Parses flags and dispatches. Returns the process exit code; errors are
/// reported on stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace voweldpp

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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "voweldpp/corpus.hpp"
#include "voweldpp/learning.hpp"
#include "voweldpp/model.hpp"

namespace voweldpp {

inline constexpr int kModelFormatVersion = 1;

/// Everything a trained run leaves behind.
struct ModelFile {
  int format_version = kModelFormatVersion;
  UniversalModel model;
  Normalization norm;
  TrainConfig config;
  SplitFractions split;
  /// Final E-step alignment of each training language, by language id.
  std::vector<std::pair<std::string, Alignment>> alignments;
};

/// Versioned, human-readable JSON. save(load(text)) reproduces text byte
/// for byte.
void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

/// JSON line for one EM iteration of the training trace.
std::string trace_line(const TraceRecord& rec);

}  // namespace voweldpp

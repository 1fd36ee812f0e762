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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voweldpp/types.hpp"

namespace voweldpp {

/// One data row of a formant corpus, in Hz.
struct RawObservation {
  std::string language_id;
  std::string study_id;  // empty when the file has no study column
  std::optional<std::string> ipa_label;
  double f1 = 0.0;
  double f2 = 0.0;

  bool operator==(const RawObservation&) const = default;
};

/// One language's vowel inventory. Pronunciations are either Hz or
/// normalized units depending on where the inventory came from; the
/// Corpus type is always normalized.
struct LanguageInventory {
  std::string language_id;
  std::vector<Vec2> pronunciations;
  /// Parallel to pronunciations; empty string where no label was given.
  std::vector<std::string> labels;

  std::size_t size() const { return pronunciations.size(); }
  /// True when every vowel carries a non-empty IPA label.
  bool fully_labeled() const;
};

/// Per-dimension z-score statistics mapping Hz to model space.
struct Normalization {
  Vec2 mean = Vec2::Zero();
  Vec2 std = Vec2::Ones();

  Vec2 apply(const Vec2& hz) const { return (hz - mean).cwiseQuotient(std); }
  Vec2 invert(const Vec2& x) const { return x.cwiseProduct(std) + mean; }

  static Normalization identity() { return {}; }
};

/// Languages in normalized units plus the statistics that produced them.
struct Corpus {
  std::vector<LanguageInventory> languages;
  Normalization norm;

  std::size_t size() const { return languages.size(); }
  std::size_t max_inventory_size() const;
  std::size_t total_pronunciations() const;
};

struct SplitFractions {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

/// Reads the CSV corpus format. The header names the columns
/// (`language,study,symbol,f1_hz,f2_hz`, study optional); lines starting
/// with '#' and blank lines are skipped. Throws ParseError naming the line
/// for malformed rows and ValidationError for non-positive formants.
std::vector<RawObservation> load_raw(const std::filesystem::path& path);
std::vector<RawObservation> parse_raw(std::istream& in);

/// Writes observations in the same schema load_raw accepts.
void write_raw(std::ostream& out, std::span<const RawObservation> rows);

/// Groups rows into one inventory per language. When a language was
/// described by several studies, one study is kept uniformly at random.
std::vector<LanguageInventory> dedup_languages(std::span<const RawObservation> observations,
                                               std::uint64_t seed);

Normalization fit_normalization(std::span<const LanguageInventory> train);

Corpus normalize(std::span<const LanguageInventory> hz, const Normalization& norm);
std::vector<LanguageInventory> denormalize(const Corpus& corpus);

/// The same partition as split(), left in Hz.
struct HzSplit {
  std::vector<LanguageInventory> train;
  std::vector<LanguageInventory> dev;
  std::vector<LanguageInventory> test;
};
HzSplit split_hz(std::span<const LanguageInventory> hz, const SplitFractions& fractions,
                 std::uint64_t seed);

/// Partitions languages into train/dev/test. Dev and test sizes are the
/// rounded fractions; the remainder goes to train. Normalization is fitted
/// on the train part and applied to all three.
CorpusSplit split(std::span<const LanguageInventory> hz, const SplitFractions& fractions,
                  std::uint64_t seed);

/// Parses "a:b:c".
SplitFractions parse_split(const std::string& spec);

}  // namespace voweldpp

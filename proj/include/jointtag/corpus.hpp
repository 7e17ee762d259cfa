#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jointtag/analysis_codec.hpp"

namespace jointtag {

struct Token {
  std::string surface;
  std::string ner_label;
  MorphAnalysis gold_analysis;
  std::vector<MorphAnalysis> candidates;
  // Index of the gold analysis among the candidates; empty when the gold
  // string is missing from the candidate list (a mismatch).
  std::optional<std::size_t> gold_index;
  // Columns 5 and 6 of a prediction file; "_" marks a column the producing
  // architecture does not predict.
  std::optional<std::string> predicted_ner;
  std::optional<std::string> predicted_analysis;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

struct LoadOptions {
  std::vector<std::string> entity_types{"PER", "LOC", "ORG"};
};

// Corpus file format, one token per line:
//   SURFACE \t NER \t GOLD_ANALYSIS \t CAND_1 CAND_2 ... CAND_k [\t PRED_NER \t PRED_ANALYSIS]
// Sentences are separated by a blank line; lines starting with '#' are comments.
Corpus load_corpus(const std::string& path, const LoadOptions& options = {});
Corpus read_corpus(std::istream& in, const std::string& source_name = "<stream>",
                   const LoadOptions& options = {});

void write_corpus(const Corpus& corpus, const std::string& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Checks a label sequence against IOB2 over the given entity types.
// Returns an empty string when valid, otherwise a description of the first violation.
std::string iob2_violation(const std::vector<std::string>& labels,
                           const std::vector<std::string>& entity_types);

struct Mismatch {
  std::size_t sentence_index = 0;
  std::size_t token_index = 0;
  std::string surface;
  std::string gold;
  std::vector<std::string> candidates;
};

struct MismatchGroup {
  std::string surface;
  std::string gold;
  std::size_t count = 0;
};

struct MismatchReport {
  std::vector<Mismatch> mismatches;
  // Grouped by identical (surface, gold); most frequent first, ties by key.
  std::vector<MismatchGroup> groups;
  std::size_t tokens_checked = 0;
  std::size_t sentences_affected = 0;

  bool empty() const { return mismatches.empty(); }
};

MismatchReport validate_gold_in_candidates(const Corpus& corpus);

// Drops every sentence that contains at least one mismatch token.
Corpus filter_mismatched(const Corpus& corpus);

void write_mismatch_report(const MismatchReport& report, std::ostream& out);

}  // namespace jointtag

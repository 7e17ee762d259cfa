#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "jointtag/corpus.hpp"

namespace jointtag {

// Parameters of a toy agglutinative language for desk-scale experiments.
//
// Sentences are sequences of "noun particle" phrases followed by a verb.
// A noun surface is root + suffix, where the suffix only identifies a group
// of `ambiguity` cases; the following particle identifies the exact case.
// Capitalized (proper) roots are entities whose type is a function of the
// gold case tag, and the cases inside one suffix group map to different
// types, so the type is recoverable through the disambiguated case.
struct SyntheticSpec {
  std::size_t train_sentences = 200;
  std::size_t dev_sentences = 50;
  std::size_t test_sentences = 200;
  std::size_t common_roots = 60;
  std::size_t proper_roots = 200;
  std::size_t verbs = 10;
  std::size_t particles_per_case = 30;
  std::size_t num_cases = 6;
  std::size_t ambiguity = 2;  // candidates per noun
  std::size_t min_phrases = 2;
  std::size_t max_phrases = 4;
  double entity_rate = 0.35;
  double multiword_rate = 0.2;
  std::uint64_t seed = 7;

  // Throws ConfigError.
  void validate() const;
};

struct SyntheticCorpus {
  Corpus train;
  Corpus dev;
  Corpus test;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Writes train.txt, dev.txt and test.txt.
void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir);

// Case tag names the generator uses, in case-index order.
std::vector<std::string> synthetic_case_names(std::size_t num_cases);
// Entity type assigned to a case index.
std::string synthetic_case_type(std::size_t case_index);

}  // namespace jointtag

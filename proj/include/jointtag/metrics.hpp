#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace jointtag::metrics {

struct Entity {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  friend auto operator<=>(const Entity&, const Entity&) = default;
};

using LabelSeq = std::vector<std::string>;

// Maximal B-initiated runs. An I-T that does not continue a T entity starts a
// new one in lenient mode and throws DataError in strict mode. Labels other
// than O / B-T / I-T throw DataError. Result is sorted.
std::vector<Entity> extract_entities(const LabelSeq& labels, bool strict = false);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_entities = 0;
  std::size_t predicted_entities = 0;
  std::size_t correct = 0;
};

// Exact (type, span) matches pooled over the corpus; 0/0 counts as 0.
PRF ner_f1(const std::vector<LabelSeq>& gold, const std::vector<LabelSeq>& predicted);

// Fraction of tokens whose predicted label string equals the gold one.
double token_accuracy(const std::vector<LabelSeq>& gold, const std::vector<LabelSeq>& predicted);

struct MdAccuracy {
  double overall = 0.0;
  std::optional<double> ambiguous;  // only tokens with >= 2 candidates; absent if none
  std::size_t tokens = 0;
  std::size_t ambiguous_tokens = 0;
};

// Flat, token-aligned inputs.
MdAccuracy md_accuracy(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                       const std::vector<std::size_t>& num_candidates);

struct RunStats {
  std::vector<double> values;
  double mean = 0.0;
  std::optional<double> stddev;  // sample standard deviation, needs n >= 2

  static RunStats of(std::vector<double> values);
};

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Throws DataError when a sample has fewer than 2 values or both variances are zero.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace jointtag::metrics
